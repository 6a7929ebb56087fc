"""集成测试模块"""

