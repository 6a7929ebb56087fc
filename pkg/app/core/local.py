"""
局部分析模块。

在基点z0处取点集 {(t, ord_{z0} B_t)} 的下凸包（Newton多边形），
斜率给出各Puiseux分支的首项指数。正斜率段对应极点，负斜率段对应零点，
重数按覆盖曲面的习惯记为 Σ(斜率 × 水平长度)，在整数坐标上精确计算。
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from app.core.equation import AlgebroidEquation
from app.core.mapping import SmallFunctionTarget, pushforward, target_difference
from app.core.polyalg import root_clusters, valuation
from app.utils.exceptions import NumericalError, TargetError
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)


@dataclass(frozen=True)
class HullSegment:
    """下凸包的一段，从 (t_start, ord_start) 到 (t_end, ord_end)。"""

    t_start: int
    ord_start: int
    t_end: int
    ord_end: int

    @property
    def length(self) -> int:
        return self.t_end - self.t_start

    @property
    def slope(self) -> Fraction:
        return Fraction(self.ord_end - self.ord_start, self.length)

    @property
    def order_change(self) -> int:
        """斜率 × 水平长度，恒为整数。"""
        return self.ord_end - self.ord_start


@dataclass(frozen=True)
class NewtonPolygon:
    """
    基点z0处的Newton多边形。

    Attributes:
        z0: 基点
        points: (t, ord) 点列，只含B_t不恒为零的t
        hull: 下凸包的线段
    """

    z0: complex
    points: tuple[tuple[int, int], ...]
    hull: tuple[HullSegment, ...]

    def pole_order(self) -> int:
        """正斜率段的Δord之和：z0上方v个分支的极点总重数。"""
        return sum(seg.order_change for seg in self.hull if seg.slope > 0)

    def zero_order(self) -> int:
        """负斜率段的|Δord|之和：z0上方v个分支的零点总重数。"""
        return sum(-seg.order_change for seg in self.hull if seg.slope < 0)

    def leading_exponents(self) -> list[tuple[Fraction, int]]:
        """各分支组的首项指数 -slope 及其分支数。"""
        return [(-seg.slope, seg.length) for seg in self.hull]

    def total_length(self) -> int:
        return sum(seg.length for seg in self.hull)


@dataclass(frozen=True)
class DivisorList:
    """
    除子：(点, 重数) 列表，原点处的重数单独记录。

    Attributes:
        entries: 非原点的点与正整数重数
        origin_multiplicity: 原点处的重数
    """

    entries: tuple[tuple[complex, int], ...] = ()
    origin_multiplicity: int = 0

    @classmethod
    def from_points(cls, points: Iterable[tuple[complex, int]]) -> "DivisorList":
        """合并τ_merge以内的点，去掉重数为0的项，把原点单独记录。"""
        merged: list[list] = []
        origin = 0
        for z, mult in points:
            if mult <= 0:
                continue
            if abs(z) <= settings.TAU_MERGE:
                origin += mult
                continue
            for entry in merged:
                if abs(entry[0] - z) <= settings.TAU_MERGE * (1.0 + abs(z)):
                    entry[1] += mult
                    break
            else:
                merged.append([complex(z), int(mult)])
        return cls(tuple((z, m) for z, m in merged), origin)

    def total(self) -> int:
        return self.origin_multiplicity + sum(m for _, m in self.entries)

    def as_pairs(self) -> list[tuple[complex, int]]:
        """全部 (点, 重数)，原点处的项放在最前。"""
        pairs = [(0j, self.origin_multiplicity)] if self.origin_multiplicity else []
        return pairs + list(self.entries)

    def __len__(self) -> int:
        return len(self.as_pairs())


def _lower_hull(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """整数点的下凸包（单调链），共线点合并。"""
    hull: list[tuple[int, int]] = []
    for p in sorted(points):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            cross = (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1)
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def newton_polygon(eq: AlgebroidEquation, z0: complex) -> NewtonPolygon:
    """
    计算z0处的Newton多边形。

    Args:
        eq: 方程
        z0: 基点

    Returns:
        NewtonPolygon

    Example:
        >>> poly = newton_polygon(sqrt_z_equation, 0)
        >>> [seg.slope for seg in poly.hull]
        [Fraction(-1, 2)]
    """
    points = [
        (t, valuation(p, z0)) for t, p in enumerate(eq.coefficients) if not p.is_zero
    ]
    hull_points = _lower_hull(points)
    segments = tuple(
        HullSegment(a[0], a[1], b[0], b[1]) for a, b in zip(hull_points, hull_points[1:])
    )
    return NewtonPolygon(complex(z0), tuple(points), segments)


def pole_divisor(eq: AlgebroidEquation) -> DivisorList:
    """
    极点除子：B_v的每个根z0上方的极点总重数。

    重复因子不影响Newton多边形，因此也接受非无平方因子的方程。
    """
    if eq.leading.degree < 1:
        return DivisorList()
    points = []
    for z0, _ in root_clusters(eq.leading):
        order = newton_polygon(eq, z0).pole_order()
        if order <= 0:
            raise NumericalError(f"B_v的根{z0}上方没有检测到极点，赋值容差可能过小")
        points.append((z0, order))
    return DivisorList.from_points(points)


def zero_divisor(eq: AlgebroidEquation, target: SmallFunctionTarget) -> DivisorList:
    """
    目标a的零点除子，即 W - a 的零点。

    先构造 M = pushforward(w - a, eq)，再在M常数项的每个根上读负斜率段。

    Raises:
        TargetError: 当W ≡ a（M的常数项恒为零）时
    """
    shifted = pushforward(target_difference(target), eq)
    b0 = shifted.coefficients[0]
    if b0.is_zero:
        raise TargetError(f"目标{target.label}与函数本身恒等")
    return zero_divisor_of(shifted)


def zero_divisor_of(eq: AlgebroidEquation) -> DivisorList:
    """方程自身的零点除子（B_0的根上的负斜率段）。"""
    b0 = eq.coefficients[0]
    if b0.is_zero:
        raise TargetError("函数有恒为零的分量")
    if b0.degree < 1:
        return DivisorList()
    points = [(z0, newton_polygon(eq, z0).zero_order()) for z0, _ in root_clusters(b0)]
    divisor = DivisorList.from_points(points)
    logger.debug(f"零点除子: 总重数={divisor.total()}")
    return divisor
