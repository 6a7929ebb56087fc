"""
验证模块。

对代数体函数的各项恒等式与不等式做桌面规模的数值检查，每项检查产出一个MarginReport：
- check_thm_2_5：特征函数的次可加性 T(r,W+M) ≤ T(r,W)+T(r,M)+log 2 与乘积形式
- check_lemma_3_1：Σ 1/(W-a_j) 的接近函数与逐项接近函数之和的差
- check_lemma_3_2：W^(n)/W 作为 W'/W 的微分多项式
- check_lemma_3_3：Wronski行列式的缩放恒等式
- check_pw_invariance：P(W - a) = P(W)
- check_smt：第二基本定理的三种形式
- check_first_main：第一基本定理的有界性

误差项S(r,W)不做符号计算，用两参数松弛模型 slack ≥ -(C₀ + C₁·log⁺(r·T(r,W))) 拟合后报告。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import sympy
from scipy.optimize import linprog

from app.core.combinatorics import independent_monomials, monomial_expr
from app.core.continuation import branch_series, sample_branch_points
from app.core.equation import AlgebroidEquation
from app.core.local import pole_divisor, zero_divisor
from app.core.mapping import (
    MapExpr,
    SmallFunctionTarget,
    map_arith,
    pushforward,
    sum_of_reciprocals,
    target_reciprocal,
)
from app.core.nevanlinna import (
    RadiusGrid,
    characteristic,
    counting,
    proximity,
    ramification_divisor,
    snap_radius,
)
from app.core.polyalg import series_derivatives, series_div
from app.core.schemas import MarginReport, MarginRow, SlackModel
from app.utils.exceptions import DegenerateInputError, TargetError
from app.utils.helpers import to_pair
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)

# 圆周积分误差的允许量（零松弛检查使用）
QUAD_ALLOWANCE = 10 * settings.TAU_QUAD
LEMMA_3_2_TOL = 1e-7
LEMMA_3_3_TOL = 1e-8
PW_TOL = 1e-6
FIRST_MAIN_BOUND = 1.0
# HiGHS的可行性容差
_LP_TOL = 1e-7


# ---------------------------------------------------------------------------
# 松弛模型
# ---------------------------------------------------------------------------


def _log_plus(x: float) -> float:
    return math.log(x) if x > 1.0 else 0.0


def fit_slack_model(
    rows: Sequence[MarginRow],
    xs: Sequence[float],
    c0_max: Optional[float] = None,
    c1_max: Optional[float] = None,
) -> SlackModel:
    """
    拟合松弛模型：求 C₀, C₁ ≥ 0，使每行 deficit_i ≤ C₀ + C₁·x_i，
    并最小化平均允许量 C₀ + C₁·mean(x)。

    Args:
        rows: 报告行，deficit = max(0, -slack)
        xs: 每行的 log⁺(r·T(r,W))
        c0_max: C₀的声明上限
        c1_max: C₁的声明上限

    Returns:
        SlackModel
    """
    c0_max = settings.SLACK_C0_MAX if c0_max is None else c0_max
    c1_max = settings.SLACK_C1_MAX if c1_max is None else c1_max
    deficits = np.array([max(0.0, -row.slack) for row in rows], dtype=float)
    x = np.asarray(xs, dtype=float)
    if len(deficits) == 0 or np.all(deficits == 0.0):
        return SlackModel(c0=0.0, c1=0.0, c0_max=c0_max, c1_max=c1_max)

    result = linprog(
        c=[1.0, float(np.mean(x)) + 1e-9],
        A_ub=np.column_stack([-np.ones_like(x), -x]),
        b_ub=-deficits,
        bounds=[(0, None), (0, None)],
        method="highs",
    )
    if not result.success:
        # 只用常数项覆盖全部亏量
        return SlackModel(c0=float(np.max(deficits)), c1=0.0, c0_max=c0_max, c1_max=c1_max)
    c0, c1 = (float(v) for v in result.x)
    return SlackModel(c0=c0, c1=c1, c0_max=c0_max, c1_max=c1_max)


def _apply_model(
    name: str,
    rows: list[MarginRow],
    xs: Sequence[float],
    c0_max: Optional[float],
    c1_max: Optional[float],
    diagnostics: Optional[dict] = None,
) -> MarginReport:
    model = fit_slack_model(rows, xs, c0_max, c1_max)
    judged = []
    for row, x in zip(rows, xs):
        allowance = model.c0 + model.c1 * x
        ok = row.slack >= -allowance - _LP_TOL * (1.0 + abs(row.slack))
        judged.append(row.model_copy(update={"allowance": allowance, "ok": ok}))
    within = model.c0 <= model.c0_max + 1e-12 and model.c1 <= model.c1_max + 1e-12
    verdict = "pass" if within and all(r.ok for r in judged) else "fail"
    logger.info(
        f"松弛模型拟合: C0={model.c0:.6g}, C1={model.c1:.6g}, 结论={verdict}",
        extra={"check": name},
    )
    return MarginReport(
        name=name, rows=judged, verdict=verdict, slack_model=model, diagnostics=diagnostics or {}
    )


def _row(
    label: str,
    lhs: float,
    rhs: float,
    allowance: float = 0.0,
    r: Optional[float] = None,
    z: Optional[complex] = None,
) -> MarginRow:
    slack = rhs - lhs
    return MarginRow(
        label=label,
        r=r,
        z=to_pair(z) if z is not None else None,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        allowance=allowance,
        ok=slack >= -allowance,
    )


def _strict_report(name: str, rows: list[MarginRow], diagnostics: Optional[dict] = None) -> MarginReport:
    verdict = "pass" if all(r.ok for r in rows) else "fail"
    logger.info(f"检查完成: {len(rows)}行, 结论={verdict}", extra={"check": name})
    return MarginReport(name=name, rows=rows, verdict=verdict, diagnostics=diagnostics or {})


def _radii(grid: RadiusGrid, eqs: Sequence[AlgebroidEquation]) -> list[float]:
    return [snap_radius(eqs, r) for r in grid.radii]


def _check_distinct(targets: Sequence[SmallFunctionTarget], eq: AlgebroidEquation) -> None:
    """目标两两不同（差不恒为零，沿曲线也不恒为零）。"""
    for i in range(len(targets)):
        for j in range(i + 1, len(targets)):
            diff = targets[i].expr - targets[j].expr
            if diff.is_zero:
                raise TargetError(f"目标重复: {targets[i].label} 与 {targets[j].label}")
            if diff.depends_on_w and pushforward(diff, eq).coefficients[0].is_zero:
                raise TargetError(f"目标沿曲线重合: {targets[i].label} 与 {targets[j].label}")


# ---------------------------------------------------------------------------
# 特征函数的次可加性
# ---------------------------------------------------------------------------


def check_thm_2_5(eq: AlgebroidEquation, h: MapExpr, grid: RadiusGrid) -> MarginReport:
    """
    T(r, W+M) ≤ T(r,W) + T(r,M) + log 2 与 T(r, W·M) ≤ T(r,W) + T(r,M)，M = h∘W。

    不拟合松弛。每行只允许 QUAD_ALLOWANCE 的圆周积分误差：
    h = w 等情形不等式取等号，精确的 slack ≥ 0 会被舍入误差打破。

    Args:
        eq: 方程W
        h: 映射，M = pushforward(h, eq)
        grid: 半径网格
    """
    name = "thm2.5"
    identity = MapExpr.identity()
    image = pushforward(h, eq)
    total = pushforward(map_arith("+", identity, h), eq)
    product = pushforward(map_arith("*", identity, h), eq)
    rows = []
    for r in _radii(grid, [eq, image, total, product]):
        t_w = characteristic(eq, r)[2]
        t_m = characteristic(image, r)[2]
        rows.append(_row("T(W+M)", characteristic(total, r)[2], t_w + t_m + math.log(2.0), QUAD_ALLOWANCE, r=r))
        rows.append(_row("T(W*M)", characteristic(product, r)[2], t_w + t_m, QUAD_ALLOWANCE, r=r))
        logger.debug(f"r={r}: T(W)={t_w:.6g}, T(M)={t_m:.6g}", extra={"check": name, "radius": r})
    return _strict_report(name, rows)


# ---------------------------------------------------------------------------
# 接近函数的可加性
# ---------------------------------------------------------------------------


def check_lemma_3_1(
    eq: AlgebroidEquation,
    targets: Sequence[SmallFunctionTarget],
    grid: RadiusGrid,
    c0_max: Optional[float] = None,
    c1_max: Optional[float] = None,
) -> MarginReport:
    """
    |m(r, Σ_j 1/(W-a_j)) - Σ_j m(r, 1/(W-a_j))| 由 C₀ + C₁·log⁺(r·T(r,W)) 控制。

    Raises:
        TargetError: 目标为空或重复
    """
    name = "lemma3.1"
    if not targets:
        raise TargetError("至少需要一个目标")
    _check_distinct(targets, eq)
    summed = pushforward(sum_of_reciprocals(targets), eq)
    singles = [pushforward(target_reciprocal(t), eq) for t in targets]

    rows, xs = [], []
    for r in _radii(grid, [eq, summed] + singles):
        t_w = characteristic(eq, r)[2]
        diff = abs(proximity(summed, r) - sum(proximity(s, r) for s in singles))
        rows.append(_row("m-additivity", diff, 0.0, r=r))
        xs.append(_log_plus(r * t_w))
    return _apply_model(name, rows, xs, c0_max, c1_max)


# ---------------------------------------------------------------------------
# 微分多项式递推
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DifferentialChain:
    """
    W^(n)/W 关于 u_k = (W'/W)^(k) 的多项式，k = 0 … n-1。

    由递推 R_1 = u_0，R_{t+1} = R_t' + R_t·u_0 构造，导数把u_k换成u_{k+1}。
    """

    n: int
    symbols: tuple
    expr: sympy.Expr
    evaluator: Callable

    def __call__(self, stream: Sequence[complex]) -> complex:
        """stream = (u_0, …, u_{n-1})。"""
        if len(stream) < self.n:
            raise DegenerateInputError(f"需要{self.n}个导数值，收到{len(stream)}个")
        return complex(self.evaluator(*stream[: self.n]))


def diff_polynomial_chain(n: int) -> DifferentialChain:
    """
    构造 W^(n)/W 的微分多项式求值器。

    Example:
        >>> chain = diff_polynomial_chain(2)
        >>> chain.expr
        u0**2 + u1
    """
    if n < 1:
        raise DegenerateInputError("n必须至少为1")
    u = sympy.symbols(f"u0:{n}")
    expr = u[0]
    for t in range(1, n):
        derivative = sum(sympy.diff(expr, u[k]) * u[k + 1] for k in range(t))
        expr = sympy.expand(derivative + expr * u[0])
    evaluator = sympy.lambdify(u, expr, "numpy")
    return DifferentialChain(n=n, symbols=tuple(u), expr=expr, evaluator=evaluator)


def _nearest_branch(series: np.ndarray, w0: complex) -> np.ndarray:
    index = int(np.argmin(np.abs(series[:, 0] - w0)))
    return series[index]


def check_lemma_3_2(
    eq: AlgebroidEquation,
    max_order: int = 4,
    sample_points: int = 10,
    seed: int = settings.DEFAULT_SEED,
) -> MarginReport:
    """在随机正则点上比较 diff_polynomial_chain(n) 与分支导数之比 w^(n)/w。"""
    name = "lemma3.2"
    chains = [diff_polynomial_chain(n) for n in range(1, max_order + 1)]
    rows = []
    for z, branches in sample_branch_points(eq, sample_points, seed):
        series = _nearest_branch(branch_series(eq, z, max_order), branches[0])
        if series[0] == 0:
            continue
        deriv = np.array([(k + 1) * series[k + 1] for k in range(max_order)])
        u = series_derivatives(series_div(deriv, series, max_order - 1))
        w_ders = series_derivatives(series)
        for chain in chains:
            expected = w_ders[chain.n] / w_ders[0]
            got = chain(u)
            scale = max(abs(expected), abs(u[0]) ** chain.n, 1e-30)
            error = abs(got - expected) / scale
            rows.append(_row(f"n={chain.n}", error, LEMMA_3_2_TOL, z=z))
    return _strict_report(name, rows)


# ---------------------------------------------------------------------------
# Wronski行列式
# ---------------------------------------------------------------------------


def wronskian_numeric(
    functions: Sequence[MapExpr],
    z0: complex,
    eq: AlgebroidEquation,
    branch: int = 0,
    w0: Optional[complex] = None,
) -> complex:
    """
    沿W的一个分支计算 W(f_1, …, f_k) 在z0处的值。

    Args:
        functions: f_1 … f_k（Q[z, w] 中的表达式）
        z0: 正则点
        eq: 方程
        branch: 分支序号（roots_at的顺序），给出w0时按w0选最近的分支
        w0: 分支在z0处的值

    Returns:
        k×k 导数矩阵的行列式

    Example:
        >>> wronskian_numeric([MapExpr.constant(1), MapExpr.variable_z()], 2.0, eq)
        (1+0j)
    """
    k = len(functions)
    if k == 0:
        raise DegenerateInputError("Wronski行列式至少需要一个函数")
    order = k - 1
    series = branch_series(eq, z0, order)
    w_series = _nearest_branch(series, w0) if w0 is not None else series[branch]
    matrix = np.array(
        [series_derivatives(f.series_along(z0, w_series, order)) for f in functions]
    ).T
    return complex(np.linalg.det(matrix))


def check_lemma_3_3(
    fs: Sequence[MapExpr],
    g: MapExpr,
    eq: AlgebroidEquation,
    sample_points: int = 100,
    seed: int = settings.DEFAULT_SEED,
) -> MarginReport:
    """W(f_1..f_k) 与 g^k·W(f_1/g, …, f_k/g) 的相对误差小于1e-8。"""
    name = "lemma3.3"
    k = len(fs)
    scaled = [map_arith("/", f, g) for f in fs]
    rows = []
    for z, branches in sample_branch_points(eq, sample_points, seed):
        w = branches[0]
        lhs = wronskian_numeric(fs, z, eq, w0=w)
        rhs = complex(g.evaluate(z, w)) ** k * wronskian_numeric(scaled, z, eq, w0=w)
        error = abs(lhs - rhs) / max(abs(lhs), 1e-30)
        rows.append(_row("wronskian-scaling", error, LEMMA_3_3_TOL, z=z))
    return _strict_report(name, rows)


def check_pw_invariance(
    eq: AlgebroidEquation,
    targets: Sequence[SmallFunctionTarget],
    s: int = 1,
    sample_points: int = 20,
    combination: Optional[Sequence[complex]] = None,
    seed: int = settings.DEFAULT_SEED,
) -> MarginReport:
    """
    P(W) = W(B_1, …, B_k, W·b_1, …, W·b_n) 在W换成W - a后不变。

    b取s次单项式的一组数值基，B取s+1次单项式的一组数值基，a = Σ c_j a_j。
    """
    name = "pw"
    if not targets:
        raise TargetError("至少需要一个目标")
    coeffs = [1.0] * len(targets) if combination is None else list(combination)
    if len(coeffs) != len(targets):
        raise DegenerateInputError("线性组合系数的个数与目标个数不一致")
    a = MapExpr.constant(0.0)
    for c, t in zip(coeffs, targets):
        a = a + t.expr * c

    lower = [monomial_expr(targets, p) for p in independent_monomials(targets, eq, s, seed=seed)]
    upper = [monomial_expr(targets, p) for p in independent_monomials(targets, eq, s + 1, seed=seed)]
    w = MapExpr.identity()
    shifted = w - a
    original = upper + [w * b for b in lower]
    moved = upper + [shifted * b for b in lower]
    logger.debug(f"P(W)的阶数: {len(original)}", extra={"check": name})

    rows = []
    for z, branches in sample_branch_points(eq, sample_points, seed):
        p_w = wronskian_numeric(original, z, eq, w0=branches[0])
        p_shift = wronskian_numeric(moved, z, eq, w0=branches[0])
        error = abs(p_w - p_shift) / max(abs(p_w), 1e-30)
        rows.append(_row("P(W-a)=P(W)", error, PW_TOL, z=z))
    return _strict_report(name, rows)


# ---------------------------------------------------------------------------
# 基本定理
# ---------------------------------------------------------------------------


def check_smt(
    eq: AlgebroidEquation,
    targets: Sequence[SmallFunctionTarget],
    epsilon: float,
    grid: RadiusGrid,
    c0_max: Optional[float] = None,
    c1_max: Optional[float] = None,
) -> MarginReport:
    """
    第二基本定理的数值检查。

    每个半径给出三行：
    - smt-counting：(q-1-ε)T(r,W) ≤ N(r,W) + Σ N(r,1/(W-a_j)) + 2N_x(r,W)
    - smt-reduced：(q-4v+3-ε)T(r,W) ≤ N(r,W) + Σ N(r,1/(W-a_j))
    - smt-proximity：m(r,W) + Σ m(r,1/(W-a_j)) ≤ (2+ε)T(r,W) + 2N_x(r,W)
    诊断项给出 T(r,a_j)/T(r,W)。

    Raises:
        TargetError: 目标少于2个或重复
        DegenerateInputError: ε不在(0, 1)内
    """
    name = "smt"
    q, v = len(targets), eq.v
    if q < 2:
        raise TargetError(f"第二基本定理至少需要2个目标，收到{q}个")
    if not 0 < epsilon < 1:
        raise DegenerateInputError(f"epsilon必须在(0, 1)内，收到{epsilon}")
    _check_distinct(targets, eq)

    poles = pole_divisor(eq)
    ram = ramification_divisor(eq)
    zeros = [zero_divisor(eq, t) for t in targets]
    reciprocals = [pushforward(target_reciprocal(t), eq) for t in targets]
    images = [pushforward(t.expr, eq) for t in targets]

    rows, xs = [], []
    ratios: dict[str, list[float]] = {f"T({t.label})/T(W)": [] for t in targets}
    for r in _radii(grid, [eq] + reciprocals + images):
        m_w, n_w, t_w = characteristic(eq, r)
        nx = counting(ram, r, v)
        n_targets = sum(counting(zd, r, v) for zd in zeros)
        m_targets = sum(proximity(rec, r) for rec in reciprocals)
        x = _log_plus(r * t_w)

        rows.append(_row("smt-counting", (q - 1 - epsilon) * t_w, n_w + n_targets + 2 * nx, r=r))
        rows.append(_row("smt-reduced", (q - 4 * v + 3 - epsilon) * t_w, n_w + n_targets, r=r))
        rows.append(_row("smt-proximity", m_w + m_targets, (2 + epsilon) * t_w + 2 * nx, r=r))
        xs += [x, x, x]
        for t, image in zip(targets, images):
            t_a = characteristic(image, r)[2]
            ratios[f"T({t.label})/T(W)"].append(t_a / t_w if t_w > 0 else float("inf"))
        logger.debug(f"r={r}: T={t_w:.6g}, N_x={nx:.6g}", extra={"check": name, "radius": r})
    return _apply_model(name, rows, xs, c0_max, c1_max, diagnostics=ratios)


def check_first_main(
    eq: AlgebroidEquation,
    targets: Sequence[SmallFunctionTarget],
    grid: RadiusGrid,
) -> MarginReport:
    """|T(r, 1/(W-a)) - T(r, W)| ≤ 1.0。"""
    name = "first-main"
    reciprocals = [(t, pushforward(target_reciprocal(t), eq)) for t in targets]
    rows = []
    for r in _radii(grid, [eq] + [rec for _, rec in reciprocals]):
        t_w = characteristic(eq, r)[2]
        for target, rec in reciprocals:
            gap = abs(characteristic(rec, r)[2] - t_w)
            rows.append(_row(f"|T(1/(W-{target.label}))-T(W)|", gap, FIRST_MAIN_BOUND, r=r))
    return _strict_report(name, rows)
