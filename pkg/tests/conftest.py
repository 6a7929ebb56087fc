"""
Pytest配置和fixtures模块。

定义测试中使用的fixtures，包括常用的代数体方程、小函数目标和规格文件路径。
这些fixtures可以在所有测试文件中使用。
"""

from pathlib import Path

import pytest

from app.core.equation import AlgebroidEquation
from app.core.mapping import MapExpr, SmallFunctionTarget

SPEC_DIR = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture
def sqrt_z() -> AlgebroidEquation:
    """W² - z = 0，即 W = √z。"""
    return AlgebroidEquation.from_table([[0, -1], [], [1]])


@pytest.fixture
def cube_root_z() -> AlgebroidEquation:
    """W³ - z = 0。"""
    return AlgebroidEquation.from_table([[0, -1], [], [], [1]])


@pytest.fixture
def identity_z() -> AlgebroidEquation:
    """W - z = 0，即亚纯函数 z。"""
    return AlgebroidEquation.from_table([[0, -1], [1]])


@pytest.fixture
def squared_factor() -> AlgebroidEquation:
    """(W - z)² = 0，含有重复因子。"""
    return AlgebroidEquation.from_table([[0, 0, 1], [0, -2], [1]])


def constant_target(value: complex, label: str = None) -> SmallFunctionTarget:
    return SmallFunctionTarget(MapExpr.constant(value), label or str(value))


@pytest.fixture
def unit_targets() -> list[SmallFunctionTarget]:
    """常数目标 {1, -1}。"""
    return [constant_target(1.0, "1"), constant_target(-1.0, "-1")]


@pytest.fixture
def smt_targets() -> list[SmallFunctionTarget]:
    """常数目标 {0, 1, -1}。"""
    return [constant_target(0.0, "0"), constant_target(1.0, "1"), constant_target(-1.0, "-1")]


@pytest.fixture
def spec_dir() -> Path:
    """示例规格文件目录。"""
    return SPEC_DIR
