"""
单项式组合模块。

L(s, A_q) 由小函数 a_1 … a_q 的s次单项式张成。本模块提供：
单项式个数 #(d, A_q) = C(q+d-1, d) 及其枚举、界 C(q+s, s+1) ≤ q(q+1)s^q、
比值 #(s+1)/#(s) < 1+ε 的最小s、归纳证明中的Pascal递推，
以及在具体目标上用奇异值估计的数值维数。
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence, Union

import numpy as np
from scipy.linalg import qr, svdvals

from app.core.continuation import sample_branch_points
from app.core.equation import AlgebroidEquation
from app.core.mapping import MapExpr, SmallFunctionTarget
from app.utils.exceptions import DegenerateInputError, MapPoleError, NumericalError
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)

_INT64_LIMIT = 2**63
# 采样遇到极点时的重采样次数
_MAX_RESAMPLE = 5
_RANK_TOL = 1e-8


def monomial_count(q: int, s_plus_1: int) -> int:
    """
    q个变量的 s+1 次单项式个数 #(s+1, A_q) = C(q+s, s+1)。

    Args:
        q: 小函数个数，q ≥ 1
        s_plus_1: 总次数，≥ 0

    Raises:
        DegenerateInputError: 参数越界
        OverflowError: 结果超出64位整数
    """
    if q < 1 or s_plus_1 < 0:
        raise DegenerateInputError(f"参数越界: q={q}, d={s_plus_1}")
    value = math.comb(q + s_plus_1 - 1, s_plus_1)
    if value >= _INT64_LIMIT:
        raise OverflowError(f"单项式个数超出64位整数: q={q}, d={s_plus_1}")
    return value


def enumerate_monomials(q: int, d: int) -> list[tuple[int, ...]]:
    """
    所有满足 Σp_j = d 的指数组 (p_1, …, p_q)，按字典序降序排列。

    Example:
        >>> enumerate_monomials(2, 2)
        [(2, 0), (1, 1), (0, 2)]
    """
    if q < 1 or d < 0:
        raise DegenerateInputError(f"参数越界: q={q}, d={d}")
    result = []
    for combo in combinations_with_replacement(range(q), d):
        exps = [0] * q
        for j in combo:
            exps[j] += 1
        result.append(tuple(exps))
    return result


def bound_check(q: int, s: int) -> bool:
    """C(q+s, s+1) ≤ q(q+1)s^q 是否成立。"""
    return math.comb(q + s, s + 1) <= q * (q + 1) * s**q


def _as_fraction(epsilon: Union[float, Fraction]) -> Fraction:
    return epsilon if isinstance(epsilon, Fraction) else Fraction(epsilon)


def find_stable_s(q: int, epsilon: Union[float, Fraction]) -> int:
    """
    使 #(s+1)/#(s) = (q+s)/(s+1) < 1+ε 的最小 s ≥ 1。

    用Fraction精确比较，边界上的等号不算满足。
    """
    if q < 1 or epsilon <= 0:
        raise DegenerateInputError(f"参数越界: q={q}, epsilon={epsilon}")
    eps = _as_fraction(epsilon)
    s = 1
    while Fraction(q + s, s + 1) >= 1 + eps:
        s += 1
    return s


def stable_s_threshold(q: int, epsilon: Union[float, Fraction]) -> int:
    """闭式：大于 (q-1-ε)/ε 的最小正整数。"""
    eps = _as_fraction(epsilon)
    bound = (q - 1 - eps) / eps
    return max(1, math.floor(bound) + 1)


def pascal_recurrence(q: int, s: int) -> tuple[int, int]:
    """
    归纳步中的恒等式两边：#(s+1, A_{q+1}) 与 Σ_{j=0..s} #(j+1, A_q) + 1。

    两边都用枚举计数。
    """
    lhs = len(enumerate_monomials(q + 1, s + 1))
    rhs = sum(len(enumerate_monomials(q, j + 1)) for j in range(s + 1)) + 1
    return lhs, rhs


def monomial_expr(targets: Sequence[SmallFunctionTarget], exponents: Sequence[int]) -> MapExpr:
    """目标的单项式 Π a_j^{p_j}。"""
    expr = MapExpr.constant(1.0)
    for target, power in zip(targets, exponents):
        if power:
            expr = expr * target.expr**power
    return expr


def _evaluation_matrix(
    targets: Sequence[SmallFunctionTarget],
    eq: AlgebroidEquation,
    degree: int,
    sample_count: int,
    seed: int,
) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """在固定分支的随机正则点上计算全部degree次单项式的值。"""
    exps = enumerate_monomials(len(targets), degree)
    exprs = [monomial_expr(targets, p) for p in exps]
    for attempt in range(_MAX_RESAMPLE):
        points = sample_branch_points(eq, sample_count, seed + attempt)
        rows = []
        for z, branches in points:
            w = branches[0]
            dens = np.array([complex(e.den(z, w)) for e in exprs])
            scale = max(1.0, max(e.den.norm() for e in exprs))
            if np.any(np.abs(dens) <= 1e-12 * scale):
                break
            rows.append([complex(e.num(z, w)) / d for e, d in zip(exprs, dens)])
        else:
            return np.array(rows, dtype=complex), exps
        logger.debug(f"采样点落在极点上，重新采样: 第{attempt + 1}次")
    raise MapPoleError("采样多次命中目标的极点")


def numeric_dim(
    targets: Sequence[SmallFunctionTarget],
    eq: AlgebroidEquation,
    s: int,
    sample_count: int,
    seed: int = settings.DEFAULT_SEED,
) -> int:
    """
    s次单项式在目标上取值矩阵的数值秩（奇异值相对阈值1e-8）。

    Args:
        targets: 小函数目标
        eq: 确定分支所用的方程
        s: 单项式总次数
        sample_count: 采样点数，不少于单项式个数
        seed: 随机种子

    Returns:
        不超过monomial_count的秩；秩等于个数说明这些单项式一般地线性无关
    """
    count = monomial_count(len(targets), s)
    if sample_count < count:
        raise DegenerateInputError(f"采样点数{sample_count}少于单项式个数{count}")
    matrix, _ = _evaluation_matrix(targets, eq, s, sample_count, seed)
    if not np.all(np.isfinite(matrix)):
        raise NumericalError("取值矩阵含有非有限值")
    values = svdvals(matrix)
    if len(values) == 0 or values[0] == 0:
        return 0
    rank = int(np.sum(values > _RANK_TOL * values[0]))
    logger.debug(f"数值维数: q={len(targets)}, s={s}, rank={rank}/{count}")
    return rank


def independent_monomials(
    targets: Sequence[SmallFunctionTarget],
    eq: AlgebroidEquation,
    degree: int,
    sample_count: int = 40,
    seed: int = settings.DEFAULT_SEED,
) -> list[tuple[int, ...]]:
    """
    从degree次单项式中选出一组数值上线性无关的基（列主元QR）。

    Returns:
        指数组列表，保持枚举顺序
    """
    sample_count = max(sample_count, monomial_count(len(targets), degree) + 5)
    matrix, exps = _evaluation_matrix(targets, eq, degree, sample_count, seed)
    _, r, piv = qr(matrix, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if len(diag) == 0 or diag[0] == 0:
        return []
    rank = int(np.sum(diag > _RANK_TOL * diag[0]))
    chosen = sorted(piv[:rank])
    return [exps[i] for i in chosen]
