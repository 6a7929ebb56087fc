"""业务服务层模块：规格文件到计算与报告的编排"""
