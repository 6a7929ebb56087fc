"""
代数体映射模块。

实现H_W代数：把 Q[z, w] 中的有理表达式 h(z, w) = num/den 看作作用在W各分支上的映射，
提供四则运算、沿分支求导，以及由结式构造 h∘W 所满足方程的推前（pushforward）。
负元、逆元、导函数与亚纯嵌入四种基本运算直接作用在方程上。

MapExpr不对Ψ取模，两个映射是否相等只在采样点上逐分支判定。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from app.core.equation import AlgebroidEquation, is_identical, squarefree_test
from app.core.polyalg import (
    BiPolynomial,
    Number,
    Polynomial,
    RationalFunction,
    poly_gcd_many,
    resultant_in_w,
    resultant_w_param,
    series_div,
)
from app.utils.exceptions import DegenerateInputError, MapPoleError, NotSquarefreeError
from app.utils.logger import get_logger

logger = get_logger(__name__)


class InfiniteFunction:
    """恒为∞的函数标记，W ≡ 0 时的逆元。"""

    _instance: Optional["InfiniteFunction"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = InfiniteFunction()


def _bipoly_rows_as_w_polys(bp: BiPolynomial) -> list[Polynomial]:
    return [bp.z_coeff(i) for i in range(bp.deg_z + 1)]


def _min_exponents(bp: BiPolynomial) -> tuple[int, int]:
    mask = np.abs(bp.grid) > 0
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    return int(rows[0]), int(cols[0])


def _shift_down(bp: BiPolynomial, dz: int, dw: int) -> BiPolynomial:
    if dz == 0 and dw == 0:
        return bp
    return BiPolynomial(bp.grid[dz:, dw:])


def _proportional(num: BiPolynomial, den: BiPolynomial) -> Optional[complex]:
    """num = c·den 时返回c。"""
    if num.grid.shape != den.grid.shape:
        return None
    flat_den = den.grid.ravel()
    k = int(np.argmax(np.abs(flat_den)))
    c = num.grid.ravel()[k] / flat_den[k]
    diff = num - den * c
    if diff.is_zero or diff.norm() <= 1e-8 * max(1.0, num.norm()):
        return complex(c)
    return None


def _reduce(num: BiPolynomial, den: BiPolynomial) -> tuple[BiPolynomial, BiPolynomial]:
    """约分的启发式：公共单项式、比例关系、z方向与w方向的内容。"""
    if den.is_zero:
        raise DegenerateInputError("映射的分母恒为零")
    if num.is_zero:
        return BiPolynomial.zero(), BiPolynomial.constant(1.0)

    c = _proportional(num, den)
    if c is not None:
        return BiPolynomial.constant(c), BiPolynomial.constant(1.0)

    nz, nw = _min_exponents(num)
    dz, dw = _min_exponents(den)
    mz, mw = min(nz, dz), min(nw, dw)
    num, den = _shift_down(num, mz, mw), _shift_down(den, mz, mw)

    z_content = poly_gcd_many(num.w_coeffs() + den.w_coeffs())
    if z_content.degree > 0:
        num, den = num.divide_by_z_polynomial(z_content), den.divide_by_z_polynomial(z_content)

    w_content = poly_gcd_many(_bipoly_rows_as_w_polys(num) + _bipoly_rows_as_w_polys(den))
    if w_content.degree > 0:
        num, den = num.divide_by_w_polynomial(w_content), den.divide_by_w_polynomial(w_content)

    c = _proportional(num, den)
    if c is not None:
        return BiPolynomial.constant(c), BiPolynomial.constant(1.0)

    # 分母的最高次项系数归一
    top = den.grid[den.deg_z, :]
    lead = top[np.nonzero(np.abs(top) > 0)[0][-1]]
    return num / lead, den / lead


@dataclass(frozen=True, eq=False)
class MapExpr:
    """
    Q[z, w] 中的有理表达式 num(z, w) / den(z, w)。

    构造时做启发式约分，分母不能恒为零。
    """

    num: BiPolynomial
    den: BiPolynomial

    @classmethod
    def create(cls, num: BiPolynomial, den: Optional[BiPolynomial] = None, reduce: bool = True) -> "MapExpr":
        den = BiPolynomial.constant(1.0) if den is None else den
        if den.is_zero:
            raise DegenerateInputError("映射的分母恒为零")
        if reduce:
            num, den = _reduce(num, den)
        return cls(num, den)

    @classmethod
    def from_grids(cls, num_grid, den_grid=None) -> "MapExpr":
        den = BiPolynomial.constant(1.0) if den_grid is None else BiPolynomial(den_grid)
        return cls.create(BiPolynomial(num_grid), den)

    @classmethod
    def identity(cls) -> "MapExpr":
        """恒等映射 h(z, w) = w。"""
        return cls(BiPolynomial.variable_w(), BiPolynomial.constant(1.0))

    @classmethod
    def variable_z(cls) -> "MapExpr":
        return cls(BiPolynomial.variable_z(), BiPolynomial.constant(1.0))

    @classmethod
    def constant(cls, value: Number) -> "MapExpr":
        return cls.create(BiPolynomial.constant(value))

    @classmethod
    def from_rational(cls, f: RationalFunction) -> "MapExpr":
        return cls.create(BiPolynomial.from_z_polynomial(f.num), BiPolynomial.from_z_polynomial(f.den))

    @classmethod
    def coerce(cls, value: Union["MapExpr", RationalFunction, Polynomial, Number]) -> "MapExpr":
        if isinstance(value, MapExpr):
            return value
        if isinstance(value, RationalFunction):
            return cls.from_rational(value)
        if isinstance(value, Polynomial):
            return cls.create(BiPolynomial.from_z_polynomial(value))
        return cls.constant(value)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_constant(self) -> bool:
        return self.num.deg_z <= 0 and self.num.deg_w <= 0 and self.den.deg_z == 0 and self.den.deg_w == 0

    @property
    def depends_on_w(self) -> bool:
        return self.num.deg_w > 0 or self.den.deg_w > 0

    def evaluate(self, z, w):
        return self.num(z, w) / self.den(z, w)

    def partial_z(self) -> "MapExpr":
        return MapExpr.create(
            self.num.partial_z() * self.den - self.num * self.den.partial_z(),
            self.den * self.den,
        )

    def partial_w(self) -> "MapExpr":
        return MapExpr.create(
            self.num.partial_w() * self.den - self.num * self.den.partial_w(),
            self.den * self.den,
        )

    def series_along(self, z0: complex, w_series: np.ndarray, order: int) -> np.ndarray:
        """沿分支 w(z0 + t) 的截断Taylor系数。"""
        num = self.num.series_along(z0, w_series, order)
        den = self.den.series_along(z0, w_series, order)
        if den[0] == 0:
            raise MapPoleError(f"映射在z={z0}处的分支上有极点")
        return series_div(num, den, order)

    def __add__(self, other):
        other = MapExpr.coerce(other)
        return MapExpr.create(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "MapExpr":
        return MapExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-MapExpr.coerce(other))

    def __rsub__(self, other):
        return MapExpr.coerce(other) - self

    def __mul__(self, other):
        other = MapExpr.coerce(other)
        return MapExpr.create(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = MapExpr.coerce(other)
        if other.is_zero:
            raise DegenerateInputError("除以恒为零的映射")
        return MapExpr.create(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return MapExpr.coerce(other) / self

    def __pow__(self, exponent: int) -> "MapExpr":
        return MapExpr.create(self.num**exponent, self.den**exponent)

    def __repr__(self) -> str:
        return f"MapExpr(num={self.num.grid.shape}, den={self.den.grid.shape})"


@dataclass(frozen=True)
class SmallFunctionTarget:
    """
    小函数目标a_j。

    是否属于X_W（T(r,a) = o(T(r,W))）由用户声明，只做经验诊断。
    """

    expr: MapExpr
    label: str
    asserted_small: bool = True


@dataclass(frozen=True)
class SplittingReport:
    """h∘W 可约性的检测报告。"""

    image: AlgebroidEquation
    reducible: bool
    witness: Optional[AlgebroidEquation]
    v_is_prime: bool
    meromorphic_copies: bool


# ---------------------------------------------------------------------------
# 方程上的基本运算
# ---------------------------------------------------------------------------


def map_negate(eq: AlgebroidEquation) -> AlgebroidEquation:
    """
    负元 -W：系数 B_t 乘以 (-1)^(v-t)。

    Example:
        >>> map_negate(AlgebroidEquation.from_table([[0, -1], [1]]))  # W - z → W + z
    """
    v = eq.v
    polys = [p * ((-1) ** (v - t)) for t, p in enumerate(eq.coefficients)]
    return AlgebroidEquation.from_polynomials(polys)


def map_invert(eq: AlgebroidEquation) -> Union[AlgebroidEquation, InfiniteFunction]:
    """
    逆元 1/W：系数倒序，即 X^v·Ψ(z, 1/X) 清分母。

    B_0 恒为零时W有一个恒为零的分量，1/W 记为 ∞，返回INFINITY标记。
    """
    if eq.coefficients[0].is_zero:
        logger.warning("B_0恒为零，1/W按约定记为∞")
        return INFINITY
    return AlgebroidEquation.from_polynomials(list(reversed(eq.coefficients)))


def _require_squarefree(eq: AlgebroidEquation, operation: str) -> None:
    if not eq.is_squarefree:
        raise NotSquarefreeError(f"{operation}要求方程无重复因子")


def map_derivative(eq: AlgebroidEquation) -> AlgebroidEquation:
    """
    导函数W'满足的方程。

    计算 Res_Y(Ψ(z, Y), Ψ_z(z, Y) + Ψ_W(z, Y)·X)，只除去与X无关的内容，
    次数保持为v。

    Raises:
        NotSquarefreeError: 当方程含有重复因子时
    """
    _require_squarefree(eq, "导函数方程")
    psi = eq.bipoly
    result = resultant_w_param(psi, [psi.partial_z(), psi.partial_w()])
    derived = AlgebroidEquation.from_bipoly(result)
    if derived.v != eq.v:
        logger.warning(f"导函数方程的次数{derived.v}与v={eq.v}不一致")
    logger.info(f"导函数方程构造完成: v={derived.v}")
    return derived


def map_expr_derivative(m: MapExpr, eq: AlgebroidEquation) -> MapExpr:
    """
    沿分支对z求全导数：m_z + m_w·(-Ψ_z/Ψ_W)。

    Raises:
        NotSquarefreeError: 当方程含有重复因子时
    """
    _require_squarefree(eq, "映射求导")
    psi = eq.bipoly
    w_prime = MapExpr.create(-psi.partial_z(), psi.partial_w())
    if not m.depends_on_w:
        return m.partial_z()
    return m.partial_z() + m.partial_w() * w_prime


def pushforward(m: MapExpr, eq: AlgebroidEquation) -> AlgebroidEquation:
    """
    h∘W 满足的方程：Res_Y(Ψ(z, Y), X·den(z, Y) - num(z, Y))。

    Args:
        m: 映射h
        eq: 无重复因子的方程

    Returns:
        关于X次数为v的方程（可约时按重数计）

    Raises:
        NotSquarefreeError: 当方程含有重复因子时
        MapPoleError: 当分母在曲线的某个分量上恒为零时
    """
    _require_squarefree(eq, "推前")
    psi = eq.bipoly
    if m.den.deg_w > 0 and resultant_in_w(psi, m.den).is_zero:
        raise MapPoleError("映射沿曲线有极点：分母在某个分量上恒为零")
    result = resultant_w_param(psi, [-m.num, m.den])
    image = AlgebroidEquation.from_bipoly(result)
    logger.debug(f"推前完成: v={image.v}")
    return image


def map_arith(op: str, m1: MapExpr, m2: MapExpr) -> MapExpr:
    """
    映射的四则运算。

    Args:
        op: "+", "-", "*", "/"（也接受 "×", "÷", "−"）
        m1: 左操作数
        m2: 右操作数

    Raises:
        DegenerateInputError: 除以恒为零的映射，或运算符未知
    """
    op = {"×": "*", "÷": "/", "−": "-"}.get(op, op)
    if op == "+":
        return m1 + m2
    if op == "-":
        return m1 - m2
    if op == "*":
        return m1 * m2
    if op == "/":
        return m1 / m2
    raise DegenerateInputError(f"未知的运算符: {op}")


def map_embed(f: Union[RationalFunction, Polynomial, Number], v: int) -> AlgebroidEquation:
    """亚纯嵌入：v个相同的亚纯函数f，方程为 (den·X - num)^v。"""
    f = RationalFunction.coerce(f)
    if v < 1:
        raise DegenerateInputError("嵌入的层数必须为正")
    base = BiPolynomial.from_w_coeffs([-f.num, f.den])
    return AlgebroidEquation.from_bipoly(base**v)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, int(n**0.5) + 1))


def image_splitting(m: MapExpr, eq: AlgebroidEquation) -> SplittingReport:
    """
    检测 h∘W 是否可约，以及是否恰为v个相同的亚纯函数。

    只做检测，不构造分裂后的各个因子。
    """
    image = pushforward(m, eq)
    result = squarefree_test(image)
    copies = False
    if not result.squarefree and result.witness is not None and result.witness.v == 1:
        b0, b1 = result.witness.coefficients
        candidate = RationalFunction(-b0, b1)
        copies = is_identical(map_embed(candidate, image.v), image).identical
    return SplittingReport(
        image=image,
        reducible=not result.squarefree,
        witness=result.witness,
        v_is_prime=_is_prime(eq.v),
        meromorphic_copies=copies,
    )


def target_difference(target: SmallFunctionTarget) -> MapExpr:
    """w - a_j。"""
    return MapExpr.identity() - target.expr


def target_reciprocal(target: SmallFunctionTarget) -> MapExpr:
    """1/(w - a_j)。"""
    return MapExpr.constant(1.0) / target_difference(target)


def sum_of_reciprocals(targets: Sequence[SmallFunctionTarget]) -> MapExpr:
    """Σ_j 1/(w - a_j)，从第一项开始累加。"""
    if not targets:
        raise DegenerateInputError("目标列表为空")
    total = target_reciprocal(targets[0])
    for target in targets[1:]:
        total = map_arith("+", total, target_reciprocal(target))
    return total
