"""
应用配置管理模块。

该模块负责加载和管理工具包的所有配置项，包括数值容差、积分参数、
松弛模型上限、日志设置等。配置优先从环境变量读取，支持通过.env文件进行本地配置。
"""

from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    应用配置类。

    使用Pydantic的BaseSettings来管理配置，支持从环境变量和.env文件加载。
    所有容差都有默认值，桌面规模的例子（次数不超过8）无需修改。
    """

    # 应用配置
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    # 如果设置，额外写入轮转的JSON日志文件
    LOG_FILE: Optional[str] = None

    # 多项式与系数容差
    TAU_COEFF: float = 1e-10
    TAU_GCD: float = 1e-8
    TAU_ROOT: float = 1e-10
    TAU_VAL: float = 1e-8
    TAU_MERGE: float = 1e-7
    # 重根在浮点下散开的相对半径上限，用于根的聚类
    TAU_CLUSTER: float = 1e-4

    # 解析延拓
    DELTA_PATH: float = 1e-3
    TAU_TRACK: float = 1e-9
    TAU_DERIV: float = 1e-7

    # 圆周积分（梯形公式，点数倍增）
    TAU_QUAD: float = 1e-6
    QUAD_MIN_POINTS: int = 64
    QUAD_MAX_POINTS: int = 65536
    # 半径避开临界点模长时的相对偏移量
    DELTA_R_FACTOR: float = 1e-3

    # S(r,W) 松弛模型的声明上限
    SLACK_C0_MAX: float = 10.0
    SLACK_C1_MAX: float = 20.0

    # 采样与并发
    DEFAULT_SEED: int = 42
    WORKER_THREADS: int = 1

    # 验证报告默认输出目录
    REPORT_DIR: str = "reports"

    class Config:
        """
        Pydantic配置类。

        指定环境变量文件路径和大小写敏感设置。
        """

        env_file = ".env"
        case_sensitive = True


# 创建全局配置实例
# 在导入时加载，整个进程生命周期内使用同一个实例
settings = Settings()
