"""
代数体方程模块。

该模块定义AlgebroidEquation：Ψ(z, W) = Σ B_t(z) W^t = 0 的清分母标准形式，
并提供标准化、恒等判定、无平方因子判定、判别式、消去式、临界点集合与逐点求根。

标准化约定：
- B_0 … B_v 没有公共根（近似GCD意义下）
- 整体常数因子固定为：B_v 的最高次系数等于1
- 被除去的公因式（含常数）记在content中，原始系数 = content · B_t
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from app.core.polyalg import (
    BiPolynomial,
    Number,
    Polynomial,
    RationalFunction,
    approx_gcd,
    poly_gcd_many,
    poly_lcm,
    poly_roots,
    resultant_w,
    root_clusters,
    subresultant_w,
)
from app.utils.exceptions import DegenerateInputError, NotSquarefreeError
from app.utils.helpers import to_pair
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)

# 临界点的来源标签
REASON_DISCRIMINANT = "discriminant"
REASON_LEADING = "leading"


@dataclass(frozen=True, eq=False)
class AlgebroidEquation:
    """
    代数体函数的清分母方程 Σ B_t(z) W^t = 0。

    Attributes:
        coefficients: B_0 … B_v（z的多项式），已标准化
        content: 标准化时除去的公共因子，原始系数 = content · B_t
    """

    coefficients: tuple[Polynomial, ...]
    content: Polynomial = field(default_factory=lambda: Polynomial.constant(1.0))

    @classmethod
    def from_polynomials(cls, polys: Sequence[Polynomial]) -> "AlgebroidEquation":
        """
        由多项式系数构造并标准化方程。

        Args:
            polys: [B_0, …, B_v]，B_v不能恒为零

        Returns:
            标准化后的方程

        Raises:
            DegenerateInputError: 当所有系数恒为零或最高次系数恒为零时
        """
        polys = [p if isinstance(p, Polynomial) else Polynomial.constant(p) for p in polys]
        if not polys or all(p.is_zero for p in polys):
            raise DegenerateInputError("方程的所有系数都恒为零")
        if polys[-1].is_zero:
            raise DegenerateInputError("最高次系数B_v恒为零")
        if len(polys) < 2:
            raise DegenerateInputError("方程关于W的次数必须为正")

        g = poly_gcd_many(polys)
        if g.degree > 0:
            polys = [p.exact_div(g) if not p.is_zero else p for p in polys]
        scale = polys[-1].leading
        polys = [p / scale for p in polys]
        return cls(tuple(polys), g * scale)

    @classmethod
    def from_bipoly(cls, bp: BiPolynomial) -> "AlgebroidEquation":
        """由关于W的二元多项式构造（第二个变量视为W）。"""
        if bp.is_zero:
            raise DegenerateInputError("方程的所有系数都恒为零")
        return cls.from_polynomials(bp.w_coeffs())

    @classmethod
    def from_table(cls, table: Sequence[Sequence[Number]]) -> "AlgebroidEquation":
        """
        由系数表构造，table[t]为B_t的升幂复系数。

        Example:
            >>> eq = AlgebroidEquation.from_table([[0, -1], [], [1]])  # W² - z
        """
        return cls.from_polynomials([Polynomial(row) for row in table])

    @property
    def v(self) -> int:
        """层数（关于W的次数）。"""
        return len(self.coefficients) - 1

    @property
    def leading(self) -> Polynomial:
        return self.coefficients[-1]

    @cached_property
    def bipoly(self) -> BiPolynomial:
        """Ψ(z, W)，第二个变量为W。"""
        return BiPolynomial.from_w_coeffs(list(self.coefficients))

    @cached_property
    def critical_set(self) -> "CriticalSet":
        """临界点集合的缓存（要求无平方因子）。"""
        return critical_points(self)

    @cached_property
    def is_squarefree(self) -> bool:
        return self.v == 1 or not discriminant(self).is_zero

    def coefficient_values(self, z) -> np.ndarray:
        """B_t(z) 的值；标量z返回 (v+1,)，数组z返回 (len(z), v+1)。"""
        values = [p(z) if not p.is_zero else np.zeros_like(np.asarray(z, dtype=complex)) for p in self.coefficients]
        return np.stack(values, axis=-1).astype(complex)

    def to_table(self) -> list[list[list[float]]]:
        """系数表，复数写成[re, im]数对。"""
        return [[to_pair(c) for c in p.coeffs] for p in self.coefficients]

    def __repr__(self) -> str:
        degrees = ", ".join(str(p.degree) for p in self.coefficients)
        return f"AlgebroidEquation(v={self.v}, deg B=({degrees}))"


@dataclass(frozen=True)
class IdentityResult:
    """恒等判定结果：identical为真时ratio为比例因子E。"""

    identical: bool
    ratio: Optional[RationalFunction] = None


@dataclass(frozen=True)
class SquarefreeResult:
    """无平方因子判定结果：不是无平方因子时witness为重复部分。"""

    squarefree: bool
    witness: Optional[AlgebroidEquation] = None


@dataclass(frozen=True)
class CriticalPoint:
    z: complex
    reasons: frozenset[str]


@dataclass(frozen=True)
class CriticalSet:
    """
    临界点集合S_W。

    由判别式的根与B_v的根合并去重得到；不在其中的点都是正则点。
    """

    points: tuple[CriticalPoint, ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def values(self) -> np.ndarray:
        return np.array([p.z for p in self.points], dtype=complex)

    def moduli(self) -> np.ndarray:
        return np.abs(self.values())

    def nearest_distance(self, z: complex) -> float:
        if not self.points:
            return float("inf")
        return float(np.min(np.abs(self.values() - z)))

    def contains(self, z: complex, tol: Optional[float] = None) -> bool:
        tol = settings.TAU_MERGE if tol is None else tol
        return self.nearest_distance(z) <= tol * (1.0 + abs(z))


# ---------------------------------------------------------------------------
# 标准化与判定
# ---------------------------------------------------------------------------


def standardize(raw: Sequence[Union[RationalFunction, Polynomial, Number]]) -> AlgebroidEquation:
    """
    把有理函数系数的方程化为清分母标准形式。

    乘以所有分母的最小公倍式，再除去公共多项式因子并做常数归一化。

    Args:
        raw: [A_0, …, A_v]，元素可以是有理函数、多项式或数

    Returns:
        标准化后的方程

    Raises:
        DegenerateInputError: 当所有系数恒为零或最高次系数恒为零时

    Example:
        >>> z = Polynomial.variable()
        >>> eq = standardize([RationalFunction(-z, z + 1), 0, RationalFunction(1, z + 1)])
        >>> eq.v
        2
    """
    rfs = [RationalFunction.coerce(x) for x in raw]
    if not rfs or all(r.is_zero for r in rfs):
        raise DegenerateInputError("方程的所有系数都恒为零")
    if rfs[-1].is_zero:
        raise DegenerateInputError("最高次系数恒为零")

    common = Polynomial.constant(1.0)
    for r in rfs:
        if r.den.degree > 0:
            common = poly_lcm(common, r.den)
    polys = [r.num * common.exact_div(r.den) if not r.is_zero else Polynomial.zero() for r in rfs]
    eq = AlgebroidEquation.from_polynomials(polys)
    logger.debug(f"方程标准化完成: v={eq.v}, 分母公倍式次数={common.degree}")
    return eq


def is_identical(eq1: AlgebroidEquation, eq2: AlgebroidEquation) -> IdentityResult:
    """
    判定两个方程是否定义同一个代数体函数（对应系数成比例）。

    标准化以后比例因子只剩常数，E = content1 / content2。

    Returns:
        IdentityResult，identical为真时ratio是比例因子E
    """
    if eq1.v != eq2.v:
        return IdentityResult(False)
    for a, b in zip(eq1.coefficients, eq2.coefficients):
        if not a.is_close(b):
            return IdentityResult(False)
    return IdentityResult(True, RationalFunction(eq1.content, eq2.content))


def eliminant(eq1: AlgebroidEquation, eq2: AlgebroidEquation) -> Polynomial:
    """两个方程关于W的结式；恒为零当且仅当两者共享正则函数元素。"""
    return resultant_w(eq1.bipoly, eq2.bipoly)


def discriminant(eq: AlgebroidEquation) -> Polynomial:
    """
    判别式 R(Ψ, Ψ_W)。

    Raises:
        DegenerateInputError: 当v < 2时
    """
    if eq.v < 2:
        raise DegenerateInputError(f"判别式无定义：v={eq.v} < 2")
    return resultant_w(eq.bipoly, eq.bipoly.partial_w())


def _generic_gcd_degree(eq: AlgebroidEquation, samples: int = 3) -> int:
    """在若干随机点z*上求Ψ(z*, ·)与Ψ_W(z*, ·)的近似公因式次数，取最小值。"""
    rng = np.random.default_rng(settings.DEFAULT_SEED)
    psi, dpsi = eq.bipoly, eq.bipoly.partial_w()
    degrees = []
    for angle in rng.uniform(0.0, 2 * np.pi, size=samples):
        z_star = 0.7 * np.exp(1j * angle)
        g = approx_gcd(Polynomial(psi.at_z(z_star), tol=0.0), Polynomial(dpsi.at_z(z_star), tol=0.0))
        degrees.append(g.degree)
    return min(degrees)


def squarefree_test(eq: AlgebroidEquation) -> SquarefreeResult:
    """
    无平方因子判定。

    判别式不恒为零即为无平方因子；否则在随机点上确定公因式的次数d，
    用第d个子结式恢复 gcd(Ψ, Ψ_W) 作为重复部分的见证。

    Returns:
        SquarefreeResult，不是无平方因子时witness为重复部分的方程
    """
    if eq.v == 1:
        return SquarefreeResult(True)
    if not discriminant(eq).is_zero:
        return SquarefreeResult(True)

    d = max(_generic_gcd_degree(eq), 1)
    psi = eq.bipoly
    witness_bp = subresultant_w(psi, psi.partial_w(), d)
    if witness_bp.is_zero or witness_bp.deg_w < 1:
        logger.warning(f"子结式见证退化: d={d}")
        return SquarefreeResult(False)
    witness = AlgebroidEquation.from_bipoly(witness_bp)
    logger.info(f"方程含有重复因子，见证次数={witness.v}")
    return SquarefreeResult(False, witness)


# ---------------------------------------------------------------------------
# 逐点求根与临界点
# ---------------------------------------------------------------------------


def roots_at(eq: AlgebroidEquation, z0: complex) -> np.ndarray:
    """
    z0处的v个根（含重数），B_v(z0)=0造成的缺失用∞补齐。

    Args:
        eq: 方程
        z0: 基点

    Returns:
        长度为v的复数数组，可能含 complex('inf')
    """
    vals = eq.coefficient_values(z0)
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        raise DegenerateInputError(f"所有系数在z0={z0}处同时为零，违反无公共零点约定")
    d = eq.v
    while d > 0 and abs(vals[d]) <= settings.TAU_COEFF * scale:
        d -= 1
    finite = poly_roots(Polynomial(vals[: d + 1], tol=0.0)) if d > 0 else np.zeros(0, dtype=complex)
    infinite = np.full(eq.v - d, complex("inf"))
    return np.concatenate([finite, infinite])


def roots_batch(eq: AlgebroidEquation, zs: np.ndarray) -> np.ndarray:
    """
    在一批正则点上同时求根（伴随矩阵特征值）。

    Returns:
        形状为 (len(zs), v) 的数组，每行为一个无序根集

    Raises:
        DegenerateInputError: 当某点处B_v为零（根在无穷远）时
    """
    zs = np.asarray(zs, dtype=complex)
    vals = eq.coefficient_values(zs).reshape(len(zs), eq.v + 1)
    lead = vals[:, -1]
    scale = np.max(np.abs(vals), axis=1)
    if np.any(np.abs(lead) <= settings.TAU_COEFF * scale):
        raise DegenerateInputError("批量求根的点上首项系数为零")
    monic = vals[:, :-1] / lead[:, None]
    v = eq.v
    if v == 1:
        return -monic
    companion = np.zeros((len(zs), v, v), dtype=complex)
    companion[:, 1:, :-1] = np.eye(v - 1)
    companion[:, :, -1] = -monic
    return np.linalg.eigvals(companion)


def _merge_points(candidates: Iterable[tuple[complex, str]]) -> tuple[CriticalPoint, ...]:
    merged: list[tuple[complex, set[str]]] = []
    for z, reason in candidates:
        for entry in merged:
            if abs(entry[0] - z) <= settings.TAU_MERGE * (1.0 + abs(z)):
                entry[1].add(reason)
                break
        else:
            merged.append((z, {reason}))
    return tuple(CriticalPoint(z, frozenset(reasons)) for z, reasons in merged)


def critical_points(eq: AlgebroidEquation) -> CriticalSet:
    """
    临界点集合：判别式的根与B_v的根之并，去重。

    Raises:
        NotSquarefreeError: 当方程含有重复因子时
    """
    candidates: list[tuple[complex, str]] = []
    if eq.v >= 2:
        disc = discriminant(eq)
        if disc.is_zero:
            raise NotSquarefreeError("方程含有重复因子，临界点集合需要因式分解")
        if disc.degree > 0:
            candidates += [(z, REASON_DISCRIMINANT) for z, _ in root_clusters(disc)]
    if eq.leading.degree > 0:
        candidates += [(z, REASON_LEADING) for z, _ in root_clusters(eq.leading)]
    result = CriticalSet(_merge_points(candidates))
    logger.debug(f"临界点数量: {len(result)}")
    return result


def hazard_points(eq: AlgebroidEquation) -> np.ndarray:
    """
    积分圆周需要避开的点。

    无平方因子时为全部临界点；否则只取B_v的根（根在无穷远处的点）。
    """
    if eq.is_squarefree:
        return eq.critical_set.values()
    if eq.leading.degree > 0:
        return poly_roots(eq.leading)
    return np.zeros(0, dtype=complex)
