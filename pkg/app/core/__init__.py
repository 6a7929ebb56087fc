"""核心计算模块：多项式代数、方程、映射、局部分析、延拓、值分布泛函与验证"""
