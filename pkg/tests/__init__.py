"""测试模块"""

