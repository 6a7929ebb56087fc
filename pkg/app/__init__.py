"""代数体函数值分布计算包"""
