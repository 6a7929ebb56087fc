"""
多项式代数单元测试。

测试一元多项式、有理函数、二元多项式、截断级数与Sylvester结式。
"""

import numpy as np
import pytest

from app.core.polyalg import (
    BiPolynomial,
    Polynomial,
    RationalFunction,
    approx_gcd,
    poly_roots,
    resultant_w,
    resultant_w_param,
    root_clusters,
    series_derivatives,
    series_div,
    series_mul,
    subresultant_coeffs,
    sylvester_matrix,
    valuation,
)
from app.utils.exceptions import DegenerateInputError

z = Polynomial.variable()


def _sorted(values):
    return sorted((complex(v) for v in values), key=lambda c: (c.real, c.imag))


def test_polynomial_trims_trailing_zeros():
    """测试构造时去掉尾部零系数"""
    p = Polynomial([1, 2, 0, 0])
    assert p.degree == 1
    assert Polynomial.zero().degree == -1
    assert Polynomial([0, 0]).is_zero


def test_polynomial_arithmetic():
    """测试多项式加减乘与整数幂"""
    p = (z + 1) * (z - 1)
    assert np.allclose(p.coeffs, [-1, 0, 1])
    assert np.allclose((z**3).coeffs, [0, 0, 0, 1])
    assert (p - p).is_zero


def test_divmod_and_exact_div():
    """测试带余除法"""
    quo, rem = (z * z - 1).divmod(z - 1)
    assert quo.is_close(z + 1)
    assert rem.is_zero
    with pytest.raises(DegenerateInputError):
        z.divmod(Polynomial.zero())


def test_derivative_and_taylor():
    """测试求导与Taylor平移"""
    assert np.allclose((z**3).derivative().coeffs, [0, 0, 3])
    assert (z**2).derivative(3).is_zero
    assert np.allclose((z**2).taylor(1.0, 2), [1, 2, 1])


def test_poly_roots_simple():
    """测试单根求解"""
    roots = poly_roots(Polynomial.from_roots([1, 2, 3]))
    assert np.allclose(_sorted(roots), [1, 2, 3], atol=1e-9)


def test_poly_roots_strips_origin():
    """测试原点处的根精确返回0"""
    roots = poly_roots(z * z * (z - 1))
    assert sum(1 for r in roots if r == 0) == 2
    assert any(abs(r - 1) < 1e-10 for r in roots)


def test_root_clusters_multiplicity():
    """测试重根聚类"""
    clusters = root_clusters((z - 1) ** 2 * (z + 2))
    found = {round(c.real, 6): m for c, m in clusters}
    assert found == {1.0: 2, -2.0: 1}


def test_approx_gcd():
    """测试近似最大公因式"""
    g = approx_gcd((z - 1) * (z - 2), (z - 1) * (z + 3))
    assert g.degree == 1
    assert g.is_close(z - 1)
    assert approx_gcd(z - 1, z + 1).degree == 0


def test_valuation():
    """测试赋值"""
    p = (z - 1) ** 3 * (z + 1)
    assert valuation(p, 1.0) == 3
    assert valuation(p, 0.0) == 0
    with pytest.raises(DegenerateInputError):
        valuation(Polynomial.zero(), 0.0)


def test_rational_function_reduces():
    """测试有理函数约分"""
    f = RationalFunction(z * z - 1, z - 1)
    assert f.den.degree == 0
    assert f.num.is_close(z + 1)
    assert RationalFunction(Polynomial.zero(), z).is_zero


def test_bipolynomial_layout():
    """测试二元多项式的系数网格约定"""
    w = BiPolynomial.variable_w()
    zz = BiPolynomial.variable_z()
    psi = w * w - zz
    assert psi.grid.shape == (2, 3)
    assert psi.grid[0, 2] == 1
    assert psi.grid[1, 0] == -1
    assert psi(4.0, 2.0) == pytest.approx(0.0)
    assert psi.partial_w().grid.shape == (1, 2)
    assert BiPolynomial.zero().is_zero


def test_series_operations():
    """测试截断级数的乘除与导数"""
    one_plus = np.array([1, 1], dtype=complex)
    one_minus = np.array([1, -1], dtype=complex)
    assert np.allclose(series_mul(one_plus, one_minus, 2), [1, 0, -1])
    assert np.allclose(series_div(np.array([1.0]), one_minus, 3), [1, 1, 1, 1])
    assert np.allclose(series_derivatives(np.array([1, 1, 1, 1.0])), [1, 1, 2, 6])
    with pytest.raises(DegenerateInputError):
        series_div(one_plus, np.array([0, 1.0]), 2)


def test_sylvester_matrix_shape():
    """测试Sylvester矩阵的阶数与行列式"""
    mat = sylvester_matrix(np.array([1, 0, -4.0]), np.array([1, -2.0]))
    assert mat.shape == (3, 3)
    # Res(w² - 4, w - 2) = 0
    assert abs(np.linalg.det(mat)) < 1e-12


def test_subresultant_zero_is_resultant():
    """测试第0个子结式等于结式"""
    a = np.array([1, 0, -4.0])
    b = np.array([1, -3.0])
    s0 = subresultant_coeffs(a, b, 0)
    assert s0[0] == pytest.approx(np.linalg.det(sylvester_matrix(a, b)))


def test_resultant_of_sqrt_with_derivative():
    """测试 Res_W(W² - z, 2W) = -4z"""
    psi = BiPolynomial([[0, 0, 1], [-1, 0, 0]])
    result = resultant_w(psi, psi.partial_w())
    assert result.degree == 1
    assert np.allclose(result.coeffs, [0, -4], atol=1e-12)


def test_parametric_resultant():
    """测试 Res_W(W² - z, 2WX - 1) = 1 - 4zX²"""
    psi = BiPolynomial([[0, 0, 1], [-1, 0, 0]])
    q0 = BiPolynomial.constant(-1.0)
    q1 = BiPolynomial([[0, 2]])
    result = resultant_w_param(psi, [q0, q1])
    assert result.grid[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert result.grid[1, 2] == pytest.approx(-4.0, abs=1e-12)
    residual = result.grid.copy()
    residual[0, 0] -= 1.0
    residual[1, 2] += 4.0
    assert np.max(np.abs(residual)) < 1e-12


def test_resultant_requires_positive_degree():
    """测试结式的输入检查"""
    psi = BiPolynomial([[0, 0, 1], [-1, 0, 0]])
    with pytest.raises(DegenerateInputError):
        resultant_w(psi, BiPolynomial.constant(2.0))


def test_bipolynomial_broadcasts_scalar_z():
    """测试标量z与数组w混合求值"""
    psi = BiPolynomial.variable_w() ** 2 - BiPolynomial.variable_z()
    values = psi(4.0, np.array([2.0, -2.0, 1.0]))
    assert values.shape == (3,)
    assert np.allclose(values, [0, 0, -3])
    assert complex(psi(4.0, 2.0)) == pytest.approx(0.0)
    assert BiPolynomial.zero()(1.0, np.ones(2)).shape == (2,)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("a, b", [(0, 1), (1, 2), (2, 0), (3, 1)])
def test_valuation_is_additive(seed, a, b):
    """测试赋值可加: ord(pq) = ord p + ord q"""
    rng = np.random.default_rng(seed)
    z0 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))

    def _factor(mult):
        # 其余根离z0至少1
        offsets = (1 + rng.uniform(0, 1, 2)) * np.exp(2j * np.pi * rng.uniform(0, 1, 2))
        others = z0 + offsets
        return Polynomial.from_roots([z0] * mult + list(others))

    p, q = _factor(a), _factor(b)
    assert valuation(p, z0) == a
    assert valuation(q, z0) == b
    assert valuation(p * q, z0) == a + b


def _linear_w_factor(rng):
    c0, c1 = rng.normal(size=2) + 1j * rng.normal(size=2)
    return BiPolynomial.variable_w() - BiPolynomial.variable_z() * c1 - c0


@pytest.mark.parametrize("seed", [3, 4, 5, 6])
def test_resultant_vanishes_on_common_factor(seed):
    """测试有公共w因式时结式恒为零"""
    rng = np.random.default_rng(seed)
    common = _linear_w_factor(rng)
    P = common * _linear_w_factor(rng)
    Q = common * _linear_w_factor(rng) * _linear_w_factor(rng)
    result = resultant_w(P, Q)
    assert result.is_zero or result.norm() < 1e-8


@pytest.mark.parametrize("seed", [3, 4, 5, 6])
def test_resultant_nonzero_when_coprime(seed):
    """测试无公共w因式时结式不恒为零"""
    rng = np.random.default_rng(seed)
    P = _linear_w_factor(rng) * _linear_w_factor(rng)
    Q = _linear_w_factor(rng) * _linear_w_factor(rng)
    result = resultant_w(P, Q)
    assert not result.is_zero
    assert result.norm() > 1e-3
