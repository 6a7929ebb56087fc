"""配置模块"""

