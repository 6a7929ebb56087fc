"""
自定义异常类模块。

定义项目特定的异常类型，用于更精确的错误处理和错误信息传递。
所有自定义异常都继承自AlgebroidError基类，便于命令行入口统一处理。
"""


class AlgebroidError(Exception):
    """
    基础异常类。

    所有项目自定义异常的基类，命令行入口将其映射为退出码1。
    """

    pass


class DegenerateInputError(AlgebroidError):
    """
    退化输入错误。

    当输入为零多项式、关于w的次数为零、或方程所有系数恒为零时抛出。
    """

    pass


class NotSquarefreeError(AlgebroidError):
    """
    非无平方因子错误。

    当操作要求Ψ(z,W)无重因子（判别式不恒为零），而输入含有重因子时抛出。
    临界点集合、导数方程、分支导数等都需要这一前提。
    """

    pass


class CriticalPointError(AlgebroidError):
    """
    临界点冲突错误。

    当积分圆周或延拓路径离临界点过近、或单值化圆内包含多余的临界点时抛出。
    通常的处理方式是微调半径或路径。
    """

    pass


class ContinuationError(AlgebroidError):
    """
    解析延拓错误。

    当路径跟踪在最小步长下仍无法满足分离裕度、或在分歧点处求导时抛出。
    """

    pass


class MapPoleError(AlgebroidError):
    """
    映射极点错误。

    当映射的分母在曲线的某个分量上恒为零（映射沿曲线有极点）时抛出。
    """

    pass


class TargetError(AlgebroidError):
    """
    目标函数错误。

    当小函数目标重复、目标与函数本身恒等、或目标数量不足时抛出。
    """

    pass


class NumericalError(AlgebroidError):
    """
    数值契约错误。

    当残差、单调性或收敛性等数值契约被违反时抛出。
    """

    pass


class SpecFileError(AlgebroidError):
    """
    规格文件错误。

    当规格文件无法解析或校验失败时抛出，错误信息包含出错的键名和行号。
    """

    pass


class UsageError(AlgebroidError):
    """
    命令行用法错误。

    子命令或参数不合法时抛出，退出码为1。
    """

    pass
