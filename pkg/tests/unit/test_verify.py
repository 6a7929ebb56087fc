"""
验证模块单元测试。

测试松弛模型拟合、微分多项式递推、Wronski行列式以及各项检查在 √z 上的结论。
"""

import math

import numpy as np
import pytest
import sympy

from app.core.mapping import MapExpr, SmallFunctionTarget
from app.core.nevanlinna import RadiusGrid
from app.core.schemas import MarginRow
from app.core.verify import (
    QUAD_ALLOWANCE,
    check_first_main,
    check_lemma_3_1,
    check_lemma_3_2,
    check_lemma_3_3,
    check_pw_invariance,
    check_smt,
    check_thm_2_5,
    diff_polynomial_chain,
    fit_slack_model,
    wronskian_numeric,
)
from app.utils.exceptions import DegenerateInputError, TargetError

w = MapExpr.identity()
z = MapExpr.variable_z()


def _row(slack: float) -> MarginRow:
    return MarginRow(label="x", lhs=-slack, rhs=0.0, slack=slack, ok=slack >= 0)


def test_fit_slack_model_zero_when_all_hold():
    """测试全部成立时松弛为零"""
    model = fit_slack_model([_row(1.0), _row(0.0)], [1.0, 2.0], 10, 20)
    assert model.c0 == 0.0
    assert model.c1 == 0.0


def test_fit_slack_model_covers_deficits():
    """测试拟合的允许量覆盖每一行的亏量"""
    rows = [_row(-1.0), _row(-2.0), _row(-3.0)]
    xs = [1.0, 2.0, 3.0]
    model = fit_slack_model(rows, xs, 10, 20)
    for row, x in zip(rows, xs):
        assert model.c0 + model.c1 * x >= -row.slack - 1e-9
    assert model.c1 == pytest.approx(1.0, abs=1e-6)


def test_diff_polynomial_chain_symbolic():
    """测试 W''/W = u0² + u1"""
    chain = diff_polynomial_chain(2)
    u0, u1 = chain.symbols
    assert sympy.expand(chain.expr - (u0**2 + u1)) == 0
    chain3 = diff_polynomial_chain(3)
    v0, v1, v2 = chain3.symbols
    assert sympy.expand(chain3.expr - (v0**3 + 3 * v0 * v1 + v2)) == 0
    with pytest.raises(DegenerateInputError):
        diff_polynomial_chain(0)


def test_diff_polynomial_chain_on_exponential():
    """测试 W = e^{2z}：u0 = 2，高阶u为0，W^(n)/W = 2^n"""
    for n in range(1, 6):
        chain = diff_polynomial_chain(n)
        assert chain([2.0] + [0.0] * (n - 1)) == pytest.approx(2.0**n)


def test_wronskian_of_polynomials(sqrt_z):
    """测试 W(1, z, z²) = 2，W(1, w) = w'"""
    assert wronskian_numeric([MapExpr.constant(1.0), z, z * z], 2.0, sqrt_z) == pytest.approx(2.0)
    value = wronskian_numeric([MapExpr.constant(1.0), w], 4.0, sqrt_z, w0=2.0)
    assert value == pytest.approx(0.25)


def test_wronskian_alternating_and_multilinear(sqrt_z):
    """测试Wronski行列式的交错性与多重线性"""
    f1, f2 = w, z * w
    base = wronskian_numeric([f1, f2], 3.0, sqrt_z, w0=math.sqrt(3.0))
    swapped = wronskian_numeric([f2, f1], 3.0, sqrt_z, w0=math.sqrt(3.0))
    scaled = wronskian_numeric([f1 * 3.0, f2], 3.0, sqrt_z, w0=math.sqrt(3.0))
    assert swapped == pytest.approx(-base)
    assert scaled == pytest.approx(3.0 * base)
    assert abs(wronskian_numeric([f1, f1], 3.0, sqrt_z)) < 1e-12


def test_check_thm_2_5_examples(sqrt_z, identity_z):
    """测试次可加性的三个例子在零松弛下成立"""
    grid = RadiusGrid.geometric(4.0, 64.0, 10)
    assert check_thm_2_5(sqrt_z, MapExpr.constant(1.0) / w, grid).passed
    assert check_thm_2_5(identity_z, MapExpr.constant(3.0), grid).passed
    report = check_thm_2_5(sqrt_z, w, grid)
    assert report.passed
    assert len(report.rows) == 20


@pytest.mark.parametrize(
    "fixture, h",
    [("sqrt_z", MapExpr.identity()), ("identity_z", MapExpr.constant(3.0))],
)
def test_check_thm_2_5_equality_boundary(request, fixture, h):
    """测试乘积不等式取等号时只由积分误差允许量兜住"""
    eq = request.getfixturevalue(fixture)
    report = check_thm_2_5(eq, h, RadiusGrid.geometric(4.0, 64.0, 6))
    assert report.passed
    assert all(row.allowance == QUAD_ALLOWANCE for row in report.rows)
    products = [row for row in report.rows if row.label == "T(W*M)"]
    assert len(products) == 6
    assert all(abs(row.slack) <= QUAD_ALLOWANCE for row in products)


def test_check_lemma_3_1_slack_model(sqrt_z, unit_targets):
    """测试接近函数可加性的松弛模型：C₁ ≤ 20"""
    report = check_lemma_3_1(sqrt_z, unit_targets, RadiusGrid.geometric(4.0, 64.0, 6))
    assert report.slack_model is not None
    assert report.slack_model.c1 <= 20
    assert report.passed


def test_check_lemma_3_1_single_target(sqrt_z):
    """测试单个目标时差恒为零"""
    target = [SmallFunctionTarget(MapExpr.constant(1.0), "1")]
    report = check_lemma_3_1(sqrt_z, target, RadiusGrid.geometric(4.0, 16.0, 3))
    assert all(row.lhs == pytest.approx(0.0, abs=1e-12) for row in report.rows)
    assert report.slack_model.c0 == pytest.approx(0.0, abs=1e-9)


def test_check_lemma_3_1_rejects_duplicates(sqrt_z):
    """测试重复目标报错"""
    targets = [
        SmallFunctionTarget(MapExpr.constant(1.0), "a"),
        SmallFunctionTarget(MapExpr.constant(1.0), "b"),
    ]
    with pytest.raises(TargetError):
        check_lemma_3_1(sqrt_z, targets, RadiusGrid.geometric(4.0, 16.0, 3))


def test_check_lemma_3_2(sqrt_z):
    """测试微分多项式递推与分支导数一致"""
    report = check_lemma_3_2(sqrt_z, max_order=4, sample_points=5, seed=1)
    assert report.passed
    assert len(report.rows) == 20


@pytest.mark.parametrize("k", [2, 3])
def test_check_lemma_3_3(sqrt_z, identity_z, k):
    """测试Wronski缩放恒等式"""
    fs = [MapExpr.constant(1.0), w, z * w][:k]
    g = z + 1.0
    assert check_lemma_3_3(fs, g, sqrt_z, sample_points=20, seed=3).passed
    fs_mero = [MapExpr.constant(1.0), z, z * z][:k]
    assert check_lemma_3_3(fs_mero, w + 2.0, identity_z, sample_points=20, seed=3).passed


def test_check_pw_invariance(sqrt_z, smt_targets):
    """测试 P(W - a) = P(W)"""
    report = check_pw_invariance(sqrt_z, smt_targets, s=1, sample_points=5, seed=2)
    assert report.passed
    with pytest.raises(TargetError):
        check_pw_invariance(sqrt_z, [], s=1)


def test_check_smt_on_sqrt(sqrt_z, smt_targets):
    """测试第二基本定理：√z 与目标 {0, 1, -1}，slack ≥ ½·log r"""
    report = check_smt(sqrt_z, smt_targets, 0.1, RadiusGrid((16.0, 64.0, 256.0)))
    assert report.passed
    counting_rows = [row for row in report.rows if row.label == "smt-counting"]
    assert len(counting_rows) == 3
    for row in counting_rows:
        assert row.slack >= 0.5 * math.log(row.r) - 1e-3
    reduced = [row for row in report.rows if row.label == "smt-reduced"]
    assert all(np.isfinite(row.lhs) and np.isfinite(row.rhs) for row in reduced)
    assert "T(1)/T(W)" in report.diagnostics


def test_check_smt_input_errors(sqrt_z, smt_targets):
    """测试第二基本定理的输入检查"""
    grid = RadiusGrid((16.0,))
    with pytest.raises(TargetError):
        check_smt(sqrt_z, smt_targets[:1], 0.1, grid)
    with pytest.raises(DegenerateInputError):
        check_smt(sqrt_z, smt_targets, 1.5, grid)


def test_check_first_main(sqrt_z):
    """测试第一基本定理的有界性"""
    targets = [
        SmallFunctionTarget(MapExpr.constant(0.0), "0"),
        SmallFunctionTarget(MapExpr.constant(1.0), "1"),
    ]
    report = check_first_main(sqrt_z, targets, RadiusGrid((4.0, 16.0, 64.0, 100.0)))
    assert report.passed
    assert len(report.rows) == 8
