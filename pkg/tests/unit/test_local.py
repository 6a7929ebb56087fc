"""
局部分析单元测试。

测试Newton多边形、极点除子与零点除子。
"""

from fractions import Fraction

import numpy as np
import pytest

from app.core.equation import AlgebroidEquation
from app.core.local import DivisorList, newton_polygon, pole_divisor, zero_divisor, zero_divisor_of
from app.core.mapping import MapExpr, SmallFunctionTarget, map_invert
from app.utils.exceptions import TargetError


def test_newton_polygon_of_sqrt(sqrt_z):
    """测试 W² - z 在原点的Newton多边形：斜率 -1/2"""
    poly = newton_polygon(sqrt_z, 0.0)
    assert poly.points == ((0, 1), (2, 0))
    assert [seg.slope for seg in poly.hull] == [Fraction(-1, 2)]
    assert poly.zero_order() == 1
    assert poly.pole_order() == 0
    assert poly.leading_exponents() == [(Fraction(1, 2), 2)]
    assert poly.total_length() == 2


def test_newton_polygon_regular_point(sqrt_z):
    """测试正则点处的多边形是水平线"""
    poly = newton_polygon(sqrt_z, 1.0)
    assert poly.zero_order() == 0
    assert poly.pole_order() == 0


def test_pole_divisor_of_reciprocal_sqrt():
    """测试 zW² - 1 在原点有一个极点（按覆盖重数计）"""
    eq = AlgebroidEquation.from_table([[-1], [], [0, 1]])
    divisor = pole_divisor(eq)
    assert divisor.origin_multiplicity == 1
    assert divisor.entries == ()
    assert divisor.total() == 1


def test_pole_divisor_entire(sqrt_z, identity_z):
    """测试首项系数为常数时没有极点"""
    assert pole_divisor(sqrt_z).total() == 0
    assert pole_divisor(identity_z).total() == 0


def test_pole_divisor_off_origin():
    """测试 (z - 2)W - 1 在 z = 2 处的单极点"""
    eq = AlgebroidEquation.from_table([[-1], [-2, 1]])
    divisor = pole_divisor(eq)
    assert len(divisor.entries) == 1
    z0, mult = divisor.entries[0]
    assert z0 == pytest.approx(2.0)
    assert mult == 1


def test_zero_divisor_of_sqrt(sqrt_z):
    """测试 √z 的零点除子：原点处重数1"""
    divisor = zero_divisor_of(sqrt_z)
    assert divisor.origin_multiplicity == 1
    assert divisor.total() == 1


def test_zero_divisor_of_target(sqrt_z):
    """测试 √z = 1 只在 z = 1 处发生一次"""
    target = SmallFunctionTarget(MapExpr.constant(1.0), "1")
    divisor = zero_divisor(sqrt_z, target)
    assert divisor.origin_multiplicity == 0
    assert len(divisor.entries) == 1
    z0, mult = divisor.entries[0]
    assert z0 == pytest.approx(1.0)
    assert mult == 1


def test_zero_divisor_of_identical_target(sqrt_z):
    """测试目标与函数本身恒等时报错"""
    target = SmallFunctionTarget(MapExpr.identity(), "w")
    with pytest.raises(TargetError):
        zero_divisor(sqrt_z, target)


def test_divisor_list_merges_points():
    """测试除子合并近邻点、丢弃零重数并单独记录原点"""
    divisor = DivisorList.from_points([(1.0, 1), (1.0 + 1e-9, 2), (0.0, 3), (2.0, 0)])
    assert divisor.origin_multiplicity == 3
    assert len(divisor.entries) == 1
    assert divisor.entries[0][1] == 3
    assert divisor.total() == 6
    assert divisor.as_pairs()[0] == (0j, 3)
    assert len(divisor) == 2


def _sorted_pairs(divisor):
    return sorted(divisor.entries, key=lambda pair: (round(pair[0].real, 6), round(pair[0].imag, 6)))


def _random_pole_table(seed):
    # B_2 = (z - a)(z - b)，B_0 = -(z - c)
    rng = np.random.default_rng(seed)
    a, b, c = rng.uniform(0.5, 3.0, 3) * np.exp(2j * np.pi * rng.uniform(0, 1, 3))
    return [[c, -1], [], [a * b, -(a + b), 1]]


@pytest.mark.parametrize(
    "table",
    [
        [[-1], [], [0, 1]],
        [[-1], [-2, -1, 1]],
        [[0, -1], [], [1, -2, 1]],
        _random_pole_table(7),
        _random_pole_table(8),
    ],
)
def test_pole_divisor_equals_zero_divisor_of_inverse(table):
    """测试W的极点除子等于1/W的零点除子"""
    eq = AlgebroidEquation.from_table(table)
    poles = pole_divisor(eq)
    zeros = zero_divisor(map_invert(eq), SmallFunctionTarget(MapExpr.constant(0.0), "0"))
    assert poles.total() == zeros.total() > 0
    assert poles.origin_multiplicity == zeros.origin_multiplicity
    got, want = _sorted_pairs(zeros), _sorted_pairs(poles)
    assert [m for _, m in got] == [m for _, m in want]
    assert np.allclose([p for p, _ in got], [p for p, _ in want], atol=1e-8)
