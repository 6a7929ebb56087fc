"""
代数体方程单元测试。

测试标准化、恒等判定、判别式、无平方因子判定、临界点与逐点求根。
"""

import numpy as np
import pytest

from app.core.equation import (
    REASON_DISCRIMINANT,
    REASON_LEADING,
    AlgebroidEquation,
    critical_points,
    discriminant,
    eliminant,
    hazard_points,
    is_identical,
    roots_at,
    roots_batch,
    squarefree_test,
    standardize,
)
from app.core.polyalg import Polynomial, RationalFunction
from app.utils.exceptions import DegenerateInputError, NotSquarefreeError

z = Polynomial.variable()


def test_from_table_normalizes_leading(sqrt_z):
    """测试常数归一化：B_v的最高次系数为1"""
    scaled = AlgebroidEquation.from_table([[0, -2], [], [2]])
    assert scaled.v == 2
    assert scaled.coefficients[0].is_close(sqrt_z.coefficients[0])
    assert scaled.content.coeffs[0] == pytest.approx(2.0)
    result = is_identical(scaled, sqrt_z)
    assert result.identical
    assert result.ratio.constant_value() == pytest.approx(2.0)


def test_common_factor_removed(sqrt_z):
    """测试除去系数的公因式"""
    eq = AlgebroidEquation.from_polynomials([-z * (z - 1), Polynomial.zero(), z - 1])
    assert eq.content.degree == 1
    assert is_identical(eq, sqrt_z).identical


def test_degenerate_inputs():
    """测试退化输入"""
    with pytest.raises(DegenerateInputError):
        AlgebroidEquation.from_table([[1], []])
    with pytest.raises(DegenerateInputError):
        AlgebroidEquation.from_table([[1]])
    with pytest.raises(DegenerateInputError):
        AlgebroidEquation.from_table([[], []])


def test_standardize_clears_denominators(sqrt_z):
    """测试有理函数系数清分母"""
    eq = standardize([RationalFunction(-z, z + 1), 0, RationalFunction(1, z + 1)])
    assert is_identical(eq, sqrt_z).identical


def test_is_identical_rejects_different(sqrt_z, cube_root_z, identity_z):
    """测试不同函数的恒等判定"""
    assert not is_identical(sqrt_z, cube_root_z).identical
    negated = AlgebroidEquation.from_table([[0, 1], [], [1]])
    assert not is_identical(sqrt_z, negated).identical
    assert is_identical(identity_z, identity_z).identical


def test_discriminant_of_sqrt(sqrt_z, identity_z):
    """测试判别式 R(W² - z, 2W) = -4z"""
    disc = discriminant(sqrt_z)
    assert disc.degree == 1
    assert np.allclose(disc.coeffs, [0, -4], atol=1e-10)
    with pytest.raises(DegenerateInputError):
        discriminant(identity_z)


def test_eliminant_detects_common_values(sqrt_z, identity_z):
    """测试消去式：W² = z 与 W = z 在 z = 0, 1 处有公共值"""
    res = eliminant(sqrt_z, identity_z)
    assert res.degree == 2
    roots = sorted(r.real for r in res.roots())
    assert roots == pytest.approx([0.0, 1.0], abs=1e-8)


def test_squarefree_test(sqrt_z, squared_factor):
    """测试无平方因子判定与子结式见证"""
    assert squarefree_test(sqrt_z).squarefree
    assert sqrt_z.is_squarefree
    result = squarefree_test(squared_factor)
    assert not result.squarefree
    assert result.witness is not None
    assert result.witness.v == 1
    assert result.witness.coefficients[0].is_close(-z)


def test_critical_points_of_sqrt(sqrt_z):
    """测试 W² - z 的临界点只有原点"""
    crit = critical_points(sqrt_z)
    assert len(crit) == 1
    point = next(iter(crit))
    assert abs(point.z) < 1e-8
    assert REASON_DISCRIMINANT in point.reasons
    assert crit.contains(0.0)
    assert not crit.contains(1.0)


def test_critical_points_include_leading_roots():
    """测试B_v的根属于临界点：zW² - 1"""
    eq = AlgebroidEquation.from_table([[-1], [], [0, 1]])
    crit = critical_points(eq)
    assert any(REASON_LEADING in p.reasons and abs(p.z) < 1e-8 for p in crit)


def test_critical_points_reject_repeated_factor(squared_factor):
    """测试含重复因子的方程不能直接求临界点"""
    with pytest.raises(NotSquarefreeError):
        critical_points(squared_factor)


def test_hazard_points_for_repeated_factor(squared_factor):
    """测试含重复因子时的积分避让点为空（B_v为常数）"""
    assert len(hazard_points(squared_factor)) == 0


def test_roots_at(sqrt_z):
    """测试逐点求根"""
    roots = sorted(roots_at(sqrt_z, 4.0), key=lambda r: r.real)
    assert roots == [pytest.approx(-2.0), pytest.approx(2.0)]


def test_roots_at_pads_infinity():
    """测试首项系数为零时用∞补齐"""
    eq = AlgebroidEquation.from_table([[-1], [], [0, 1]])
    roots = roots_at(eq, 0.0)
    assert len(roots) == 2
    assert np.sum(np.isinf(roots.real)) == 2


def test_roots_batch_matches_roots_at(cube_root_z):
    """测试批量求根与逐点求根一致"""
    zs = np.array([1.0, 2j, -3.0 + 1j])
    batch = roots_batch(cube_root_z, zs)
    assert batch.shape == (3, 3)
    for row, z0 in zip(batch, zs):
        expected = sorted(roots_at(cube_root_z, z0), key=lambda r: (round(r.real, 8), r.imag))
        got = sorted(row, key=lambda r: (round(r.real, 8), r.imag))
        assert np.allclose(got, expected, atol=1e-9)
