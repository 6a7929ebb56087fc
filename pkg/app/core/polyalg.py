"""
多项式代数模块。

该模块提供复浮点系数的一元/二元多项式与有理函数运算，是整个工具包的底层：
求根（Aberth同时迭代，伴随矩阵兜底）、近似最大公因式、赋值（根的重数）、
关于w的Sylvester结式（在单位圆上取值后用FFT插值恢复系数），以及截断幂级数运算。

系数一律按升幂存储：Polynomial的coeffs[k]是z^k的系数，BiPolynomial的grid[i][j]
是z^i w^j的系数。所有对象构造后不可变，可以在线程之间安全共享。
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

from app.utils.exceptions import DegenerateInputError
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)

Number = Union[int, float, complex]

# Aberth迭代的最大步数
_ABERTH_MAX_ITER = 500


def _trim_trailing(arr: np.ndarray, tol: float) -> np.ndarray:
    """去掉模不超过tol的高次尾部系数。"""
    last = len(arr) - 1
    while last >= 0 and abs(arr[last]) <= tol:
        last -= 1
    return arr[: last + 1].copy()


def chop(values: np.ndarray, tol: float) -> np.ndarray:
    """把模不超过tol的元素置为精确的0，用于消除插值和行列式的舍入噪声。"""
    out = np.array(values, dtype=complex, copy=True)
    out[np.abs(out) <= tol] = 0.0
    return out


class Polynomial:
    """
    复系数一元多项式（升幂存储）。

    构造时按τ_coeff去掉尾部零系数，因此首项系数的模大于τ_coeff，
    零多项式用空系数表示，次数为-1。
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[Number] = (), tol: Optional[float] = None):
        raw = coeffs if isinstance(coeffs, np.ndarray) else list(coeffs)
        arr = np.atleast_1d(np.asarray(raw, dtype=complex)).ravel()
        tol = settings.TAU_COEFF if tol is None else tol
        arr = _trim_trailing(arr, tol)
        arr.setflags(write=False)
        self._c = arr

    # ---- 构造 ----

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def constant(cls, value: Number) -> "Polynomial":
        return cls((value,))

    @classmethod
    def variable(cls) -> "Polynomial":
        """多项式 z。"""
        return cls((0.0, 1.0))

    @classmethod
    def from_roots(cls, roots: Sequence[Number], leading: Number = 1.0) -> "Polynomial":
        if len(roots) == 0:
            return cls.constant(leading)
        return cls(npoly.polyfromroots(np.asarray(roots, dtype=complex)) * leading)

    # ---- 基本属性 ----

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    @property
    def is_zero(self) -> bool:
        return len(self._c) == 0

    @property
    def leading(self) -> complex:
        if self.is_zero:
            return 0j
        return complex(self._c[-1])

    def norm(self) -> float:
        """系数的最大模。"""
        return float(np.max(np.abs(self._c))) if len(self._c) else 0.0

    def __call__(self, z):
        if self.is_zero:
            return np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
        return npoly.polyval(z, self._c)

    # ---- 运算 ----

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Polynomial(npoly.polyadd(self._c if len(self._c) else [0], other._c if len(other._c) else [0]))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self._c)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial(self._c * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return Polynomial.zero()
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __truediv__(self, scalar: Number) -> "Polynomial":
        if scalar == 0:
            raise DegenerateInputError("多项式不能除以0")
        return Polynomial(self._c / scalar)

    def __pow__(self, exponent: int) -> "Polynomial":
        result = Polynomial.constant(1.0)
        for _ in range(exponent):
            result = result * self
        return result

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        """
        多项式带余除法。

        Args:
            other: 除式，不能为零多项式

        Returns:
            (商, 余式)

        Raises:
            DegenerateInputError: 当除式为零多项式时
        """
        if other.is_zero:
            raise DegenerateInputError("除式为零多项式")
        if self.is_zero:
            return Polynomial.zero(), Polynomial.zero()
        quo, rem = npoly.polydiv(self._c, other._c)
        return Polynomial(quo), Polynomial(rem)

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        """已知整除时的商，余式被丢弃。"""
        return self.divmod(other)[0]

    def derivative(self, order: int = 1) -> "Polynomial":
        if self.degree < order:
            return Polynomial.zero()
        return Polynomial(npoly.polyder(self._c, order))

    def monic(self) -> "Polynomial":
        if self.is_zero:
            return self
        return self / self.leading

    def chopped(self, tol: float) -> "Polynomial":
        return Polynomial(chop(self._c, tol), tol=0.0)

    def taylor(self, z0: complex, order: int) -> np.ndarray:
        """
        p(z0 + t) 的前 order+1 个Taylor系数。

        使用反复综合除法（Horner平移），结果长度固定为 order+1。
        """
        out = np.zeros(order + 1, dtype=complex)
        cur = np.array(self._c, dtype=complex)
        for k in range(order + 1):
            if len(cur) == 0:
                break
            quo, rem = _synthetic_division(cur, z0)
            out[k] = rem
            cur = quo
        return out

    def is_close(self, other: "Polynomial", tol: Optional[float] = None) -> bool:
        tol = settings.TAU_GCD if tol is None else tol
        diff = self - other
        scale = max(1.0, self.norm(), other.norm())
        return diff.norm() <= tol * scale

    def roots(self) -> np.ndarray:
        return poly_roots(self)

    def __repr__(self) -> str:
        if self.is_zero:
            return "Polynomial(0)"
        terms = ", ".join(_format_number(c) for c in self._c)
        return f"Polynomial([{terms}])"


def _format_number(value: complex) -> str:
    value = complex(value)
    if value.imag == 0:
        return f"{value.real:.6g}"
    return f"{value.real:.6g}{value.imag:+.6g}j"


def _synthetic_division(coeffs: np.ndarray, z0: complex) -> tuple[np.ndarray, complex]:
    """用 (z - z0) 对升幂系数做综合除法，返回 (商的升幂系数, 余数)。"""
    n = len(coeffs) - 1
    if n == 0:
        return np.zeros(0, dtype=complex), complex(coeffs[0])
    quo = np.zeros(n, dtype=complex)
    acc = complex(coeffs[n])
    for k in range(n - 1, -1, -1):
        quo[k] = acc
        acc = coeffs[k] + acc * z0
    return quo, acc


# ---------------------------------------------------------------------------
# 求根
# ---------------------------------------------------------------------------


def _root_residual_ok(coeffs: np.ndarray, roots: np.ndarray, tol: float) -> bool:
    if len(roots) == 0:
        return True
    deg = len(coeffs) - 1
    scale = np.max(np.abs(coeffs))
    values = np.abs(npoly.polyval(roots, coeffs))
    bound = tol * scale * (1.0 + np.abs(roots)) ** deg
    return bool(np.all(np.isfinite(roots)) and np.all(values <= bound))


def _aberth(coeffs: np.ndarray) -> np.ndarray:
    """Aberth–Ehrlich同时迭代，coeffs为升幂且常数项非零。"""
    n = len(coeffs) - 1
    dcoeffs = npoly.polyder(coeffs)
    # 初值：半径取根模的几何平均，角度错开避免对称卡死
    radius = abs(coeffs[0] / coeffs[-1]) ** (1.0 / n)
    radius = radius if radius > 0 else 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)

    for _ in range(_ABERTH_MAX_ITER):
        pv = npoly.polyval(z, coeffs)
        dpv = npoly.polyval(z, dcoeffs)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.sum(1.0 / diff, axis=1)
            newton = np.where(pv == 0, 0.0, dpv / np.where(pv == 0, 1.0, pv))
            denom = newton - s
            corr = np.where((pv == 0) | (denom == 0), 0.0, 1.0 / np.where(denom == 0, 1.0, denom))
        z = z - corr
        if np.all(np.abs(corr) <= 4e-16 * (1.0 + np.abs(z))):
            break
    return z


def poly_roots(p: Polynomial) -> np.ndarray:
    """
    求多项式的全部根（含重数）。

    先精确剥离原点处的根，剩余部分用Aberth同时迭代；
    若残差契约 |p(r)| ≤ τ_root·max|c|·(1+|r|)^deg 不满足，则改用伴随矩阵特征值。

    Args:
        p: 非零多项式

    Returns:
        长度为deg(p)的复数数组

    Raises:
        DegenerateInputError: 当p为零多项式时（根集无定义）
    """
    if p.is_zero:
        raise DegenerateInputError("零多项式的根集无定义")
    c = p.coeffs
    if p.degree == 0:
        return np.zeros(0, dtype=complex)

    scale = p.norm()
    k = 0
    while k < len(c) - 1 and abs(c[k]) <= settings.TAU_COEFF * scale:
        k += 1
    core = c[k:]
    roots = np.zeros(k, dtype=complex)
    if len(core) > 1:
        found = _aberth(core)
        if not _root_residual_ok(core, found, settings.TAU_ROOT):
            logger.debug("Aberth迭代未满足残差契约，改用伴随矩阵求根")
            found = npoly.polyroots(core)
            if not _root_residual_ok(core, found, settings.TAU_ROOT):
                logger.warning(f"求根残差超出契约，次数={len(core) - 1}")
        roots = np.concatenate([roots, found])
    return roots


def root_clusters(p: Polynomial, tol: Optional[float] = None) -> list[tuple[complex, int]]:
    """
    把数值根按距离聚类为 (中心, 重数)。

    m重根在双精度下会散开成半径约 eps^(1/m) 的一簇，簇的质心远比单个根准确；
    质心再用 p^(m-1) 的Newton迭代修正。

    Args:
        p: 非零多项式
        tol: 相对聚类半径，默认为settings.TAU_CLUSTER

    Returns:
        (根, 重数) 列表，重数之和等于deg(p)
    """
    tol = settings.TAU_CLUSTER if tol is None else tol
    roots = poly_roots(p)
    clusters: list[list[complex]] = []
    for r in sorted(roots, key=lambda x: (round(x.real, 6), round(x.imag, 6))):
        for cluster in clusters:
            center = np.mean(cluster)
            if abs(r - center) <= tol * (1.0 + abs(center)):
                cluster.append(r)
                break
        else:
            clusters.append([r])

    result = []
    for cluster in clusters:
        m = len(cluster)
        center = complex(np.mean(cluster))
        if center != 0 or any(x != 0 for x in cluster):
            deriv = p.derivative(m - 1)
            dderiv = deriv.derivative()
            for _ in range(3):
                dv = dderiv(center)
                if dv == 0:
                    break
                step = deriv(center) / dv
                if not np.isfinite(step) or abs(step) > tol * (1.0 + abs(center)):
                    break
                center -= step
        result.append((complex(center), m))
    return result


# ---------------------------------------------------------------------------
# 近似GCD与赋值
# ---------------------------------------------------------------------------


def approx_gcd(p: Polynomial, q: Polynomial, tol: Optional[float] = None) -> Polynomial:
    """
    近似最大公因式。

    对降次的Euclid余式序列做相对截断：余式的系数若不超过 tol·max|被除式系数|
    则视为零。每一步把余式规范到单位最大模，避免系数尺度漂移。

    Args:
        p: 多项式
        q: 多项式（不能与p同时为零）
        tol: 相对截断容差，默认为settings.TAU_GCD

    Returns:
        首一的公因式；互素时返回常数1
    """
    tol = settings.TAU_GCD if tol is None else tol
    if p.is_zero and q.is_zero:
        raise DegenerateInputError("两个多项式不能同时为零")
    if p.is_zero:
        return q.monic()
    if q.is_zero:
        return p.monic()

    a, b = p / p.norm(), q / q.norm()
    if a.degree < b.degree:
        a, b = b, a
    while True:
        if b.degree == 0:
            return Polynomial.constant(1.0)
        _, r = a.divmod(b)
        r = r.chopped(tol * max(1.0, a.norm()))
        if r.is_zero:
            return b.monic()
        a, b = b, r / r.norm()


def valuation(p: Polynomial, z0: complex, tol: Optional[float] = None) -> int:
    """
    多项式在z0处的赋值：(z - z0)^k 整除p的最大k。

    反复做综合除法，余数不超过 tol·max|c|·(1+|z0|)^deg 时视为整除。

    Raises:
        DegenerateInputError: 当p为零多项式时
    """
    tol = settings.TAU_VAL if tol is None else tol
    if p.is_zero:
        raise DegenerateInputError("零多项式的赋值无定义")
    cur = np.array(p.coeffs, dtype=complex)
    k = 0
    while len(cur) > 1:
        scale = np.max(np.abs(cur)) * (1.0 + abs(z0)) ** (len(cur) - 1)
        quo, rem = _synthetic_division(cur, z0)
        if abs(rem) > tol * scale:
            break
        k += 1
        cur = quo
    return k


def poly_gcd_many(polys: Sequence[Polynomial], tol: Optional[float] = None) -> Polynomial:
    """一组多项式（忽略零多项式）的近似公因式。"""
    nonzero = [p for p in polys if not p.is_zero]
    if not nonzero:
        raise DegenerateInputError("所有多项式都为零")
    g = nonzero[0].monic()
    for p in nonzero[1:]:
        if g.degree == 0:
            break
        g = approx_gcd(g, p, tol)
    return g


# ---------------------------------------------------------------------------
# 有理函数
# ---------------------------------------------------------------------------


class RationalFunction:
    """
    有理函数 num/den。

    规范化后分子分母没有近似公因式，分母首一；零函数的分母为1。
    """

    __slots__ = ("num", "den")

    def __init__(
        self,
        num: Union[Polynomial, Number],
        den: Union[Polynomial, Number, None] = None,
        reduce: bool = True,
    ):
        num = num if isinstance(num, Polynomial) else Polynomial.constant(num)
        den = Polynomial.constant(1.0) if den is None else den
        den = den if isinstance(den, Polynomial) else Polynomial.constant(den)
        if den.is_zero:
            raise DegenerateInputError("有理函数的分母恒为零")
        if num.is_zero:
            num, den = Polynomial.zero(), Polynomial.constant(1.0)
        elif reduce and den.degree > 0 and num.degree > 0:
            g = approx_gcd(num, den)
            if g.degree > 0:
                num, den = num.exact_div(g), den.exact_div(g)
        lc = den.leading
        self.num = num / lc
        self.den = den / lc

    @classmethod
    def coerce(cls, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        return cls(value)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_constant(self) -> bool:
        return self.den.degree == 0 and self.num.degree <= 0

    def constant_value(self) -> complex:
        if not self.is_constant:
            raise DegenerateInputError("有理函数不是常数")
        return 0j if self.num.is_zero else complex(self.num.coeffs[0] / self.den.coeffs[0])

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def __add__(self, other):
        other = RationalFunction.coerce(other)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-RationalFunction.coerce(other))

    def __mul__(self, other):
        other = RationalFunction.coerce(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalFunction.coerce(other)
        if other.is_zero:
            raise DegenerateInputError("除以恒为零的有理函数")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __repr__(self) -> str:
        return f"RationalFunction({self.num!r} / {self.den!r})"


def poly_lcm(p: Polynomial, q: Polynomial) -> Polynomial:
    """两个非零多项式的首一近似最小公倍式。"""
    g = approx_gcd(p, q)
    return (p * q).exact_div(g).monic()


# ---------------------------------------------------------------------------
# 二元多项式
# ---------------------------------------------------------------------------


class BiPolynomial:
    """
    复系数二元多项式，grid[i][j] 为 z^i w^j 的系数。

    构造时按τ_coeff去掉尾部的零行零列；零多项式的grid形状为(0, 0)。
    第二个变量既可以是原函数的w，也可以是结式中新引入的X。
    """

    __slots__ = ("_g",)

    def __init__(self, grid, tol: Optional[float] = None):
        arr = np.asarray(grid, dtype=complex)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if arr.size else np.zeros((0, 0), dtype=complex)
        tol = settings.TAU_COEFF if tol is None else tol
        if arr.size:
            mask = np.abs(arr) > tol
            if not mask.any():
                arr = np.zeros((0, 0), dtype=complex)
            else:
                rows = np.nonzero(mask.any(axis=1))[0]
                cols = np.nonzero(mask.any(axis=0))[0]
                arr = arr[: rows[-1] + 1, : cols[-1] + 1].copy()
        else:
            arr = np.zeros((0, 0), dtype=complex)
        arr.setflags(write=False)
        self._g = arr

    @classmethod
    def zero(cls) -> "BiPolynomial":
        return cls(np.zeros((0, 0)))

    @classmethod
    def constant(cls, value: Number) -> "BiPolynomial":
        return cls([[value]])

    @classmethod
    def variable_w(cls) -> "BiPolynomial":
        return cls([[0.0, 1.0]])

    @classmethod
    def variable_z(cls) -> "BiPolynomial":
        return cls([[0.0], [1.0]])

    @classmethod
    def from_w_coeffs(cls, polys: Sequence[Polynomial]) -> "BiPolynomial":
        """由关于w的系数多项式 [P_0(z), P_1(z), ...] 组装。"""
        rows = max((p.degree + 1 for p in polys), default=0)
        if rows == 0:
            return cls.zero()
        grid = np.zeros((rows, len(polys)), dtype=complex)
        for j, p in enumerate(polys):
            grid[: p.degree + 1, j] = p.coeffs
        return cls(grid)

    @classmethod
    def from_z_polynomial(cls, p: Polynomial) -> "BiPolynomial":
        return cls.from_w_coeffs([p])

    @property
    def grid(self) -> np.ndarray:
        return self._g

    @property
    def is_zero(self) -> bool:
        return self._g.size == 0

    @property
    def deg_z(self) -> int:
        return self._g.shape[0] - 1

    @property
    def deg_w(self) -> int:
        return self._g.shape[1] - 1

    def norm(self) -> float:
        return float(np.max(np.abs(self._g))) if self._g.size else 0.0

    def w_coeff(self, j: int) -> Polynomial:
        """w^j 的系数，作为z的多项式。"""
        if j < 0 or j > self.deg_w:
            return Polynomial.zero()
        return Polynomial(self._g[:, j])

    def z_coeff(self, i: int) -> Polynomial:
        """z^i 的系数，作为w的多项式。"""
        if i < 0 or i > self.deg_z:
            return Polynomial.zero()
        return Polynomial(self._g[i, :])

    def w_coeffs(self) -> list[Polynomial]:
        return [self.w_coeff(j) for j in range(self.deg_w + 1)]

    def at_z(self, z) -> np.ndarray:
        """
        把z代入后得到关于w的升幂系数。

        标量z返回形状 (deg_w+1,)，数组z返回形状 (deg_w+1, len(z))。
        """
        if self.is_zero:
            return np.zeros(1, dtype=complex)
        return npoly.polyval(z, self._g)

    def __call__(self, z, w):
        # polyval2d要求z与w同形
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        if self.is_zero:
            return np.zeros(z.shape, dtype=complex)[()]
        return npoly.polyval2d(z, w, self._g)[()]

    def partial_z(self) -> "BiPolynomial":
        if self.deg_z < 1:
            return BiPolynomial.zero()
        return BiPolynomial(npoly.polyder(self._g, axis=0))

    def partial_w(self) -> "BiPolynomial":
        if self.deg_w < 1:
            return BiPolynomial.zero()
        return BiPolynomial(npoly.polyder(self._g, axis=1))

    def _coerce(self, other) -> "BiPolynomial":
        if isinstance(other, BiPolynomial):
            return other
        if isinstance(other, Polynomial):
            return BiPolynomial.from_z_polynomial(other)
        if isinstance(other, (int, float, complex, np.number)):
            return BiPolynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        rows = max(self._g.shape[0], other._g.shape[0])
        cols = max(self._g.shape[1], other._g.shape[1])
        out = np.zeros((rows, cols), dtype=complex)
        out[: self._g.shape[0], : self._g.shape[1]] += self._g
        out[: other._g.shape[0], : other._g.shape[1]] += other._g
        return BiPolynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "BiPolynomial":
        return BiPolynomial(-self._g) if not self.is_zero else self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return BiPolynomial(self._g * other) if not self.is_zero else self
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return BiPolynomial.zero()
        return BiPolynomial(convolve2d(self._g, other._g))

    __rmul__ = __mul__

    def __truediv__(self, scalar: Number) -> "BiPolynomial":
        if scalar == 0:
            raise DegenerateInputError("二元多项式不能除以0")
        return BiPolynomial(self._g / scalar) if not self.is_zero else self

    def __pow__(self, exponent: int) -> "BiPolynomial":
        result = BiPolynomial.constant(1.0)
        for _ in range(exponent):
            result = result * self
        return result

    def divide_by_z_polynomial(self, p: Polynomial) -> "BiPolynomial":
        """每个w系数都整除p时的商。"""
        return BiPolynomial.from_w_coeffs([c.exact_div(p) if not c.is_zero else c for c in self.w_coeffs()])

    def divide_by_w_polynomial(self, p: Polynomial) -> "BiPolynomial":
        """每个z系数（作为w的多项式）都整除p时的商。"""
        rows = [self.z_coeff(i) for i in range(self.deg_z + 1)]
        quotients = [r.exact_div(p) if not r.is_zero else r for r in rows]
        width = max((q.degree + 1 for q in quotients), default=0)
        if width == 0:
            return BiPolynomial.zero()
        grid = np.zeros((len(quotients), width), dtype=complex)
        for i, q in enumerate(quotients):
            grid[i, : q.degree + 1] = q.coeffs
        return BiPolynomial(grid)

    def series_along(self, z0: complex, w_series: np.ndarray, order: int) -> np.ndarray:
        """
        沿一个分支的截断Taylor级数求值：F(z0 + t, w(t)) 的前 order+1 个系数。

        Args:
            z0: 展开点
            w_series: 分支w(z0 + t)的Taylor系数
            order: 截断阶数

        Returns:
            长度为order+1的系数数组
        """
        result = np.zeros(order + 1, dtype=complex)
        if self.is_zero:
            return result
        ws = np.zeros(order + 1, dtype=complex)
        ws[: min(order + 1, len(w_series))] = w_series[: order + 1]
        for j in range(self.deg_w, -1, -1):
            result = series_mul(result, ws, order) + self.w_coeff(j).taylor(z0, order)
        return result

    def is_close(self, other: "BiPolynomial", tol: Optional[float] = None) -> bool:
        tol = settings.TAU_GCD if tol is None else tol
        diff = self - other
        return diff.norm() <= tol * max(1.0, self.norm(), other.norm())

    def __repr__(self) -> str:
        return f"BiPolynomial(shape={self._g.shape})"


# ---------------------------------------------------------------------------
# 截断幂级数
# ---------------------------------------------------------------------------


def series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """两个截断级数的乘积，保留到t^order。"""
    out = np.zeros(order + 1, dtype=complex)
    prod = np.convolve(a[: order + 1], b[: order + 1])[: order + 1]
    out[: len(prod)] = prod
    return out


def series_div(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """
    截断级数的商 a/b，要求b的常数项非零。

    Raises:
        DegenerateInputError: 当b(0)=0时
    """
    if b[0] == 0:
        raise DegenerateInputError("级数除法要求分母常数项非零")
    out = np.zeros(order + 1, dtype=complex)
    for k in range(order + 1):
        acc = a[k] if k < len(a) else 0.0
        for i in range(1, min(k, len(b) - 1) + 1):
            acc -= b[i] * out[k - i]
        out[k] = acc / b[0]
    return out


def series_derivatives(series: np.ndarray) -> np.ndarray:
    """由Taylor系数得到各阶导数值 f^(k)(z0) = k!·c_k。"""
    factorials = np.array([math.factorial(k) for k in range(len(series))], dtype=float)
    return series * factorials


# ---------------------------------------------------------------------------
# Sylvester结式与子结式
# ---------------------------------------------------------------------------


def sylvester_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    降幂系数向量a（形式次数m）、b（形式次数n）的Sylvester矩阵。

    前n行是a的平移，后m行是b的平移，矩阵阶数为m+n。
    """
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    mat = np.zeros((size, size), dtype=complex)
    for i in range(n):
        mat[i, i : i + m + 1] = a
    for i in range(m):
        mat[n + i, i : i + n + 1] = b
    return mat


def _det(mat: np.ndarray) -> complex:
    if mat.shape[0] == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(mat))


def subresultant_coeffs(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    """
    第d个子结式 S_d 的升幂系数（长度d+1）。

    取n-d个a的平移行与m-d个b的平移行，S_d的w^j系数是前m+n-2d-1列
    加上w^j所在列构成的方阵的行列式。d=0时即为结式。
    """
    m, n = len(a) - 1, len(b) - 1
    rows = (n - d) + (m - d)
    cols = m + n - d
    mat = np.zeros((rows, cols), dtype=complex)
    for i in range(n - d):
        mat[i, i : i + m + 1] = a
    for i in range(m - d):
        mat[n - d + i, i : i + n + 1] = b
    lead = rows - 1
    out = np.zeros(d + 1, dtype=complex)
    for j in range(d + 1):
        col = cols - 1 - j
        sub = np.concatenate([mat[:, :lead], mat[:, col : col + 1]], axis=1)
        out[j] = _det(sub)
    return out


def _unit_circle_nodes(count: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(count) / count)


def _resultant_scale(P: BiPolynomial, Q_norm: float, deg_q: int) -> float:
    return max(1.0, P.norm()) ** max(deg_q, 0) * max(1.0, Q_norm) ** max(P.deg_w, 0)


def resultant_in_w(P: BiPolynomial, Q: BiPolynomial) -> Polynomial:
    """
    关于w的结式（允许Q关于w的次数为0）。

    在单位圆的 D+1 个点上计算Sylvester行列式，D是结式关于z的次数上界
    deg_w(Q)·deg_z(P) + deg_w(P)·deg_z(Q)，再用FFT恢复系数。
    """
    m, n = P.deg_w, Q.deg_w
    bound = n * max(P.deg_z, 0) + m * max(Q.deg_z, 0)
    nodes = _unit_circle_nodes(bound + 1)
    pa = P.at_z(nodes).reshape(m + 1, -1)
    qa = Q.at_z(nodes).reshape(n + 1, -1)
    values = np.array(
        [_det(sylvester_matrix(pa[::-1, k], qa[::-1, k])) for k in range(len(nodes))]
    )
    coeffs = np.fft.fft(values) / len(nodes)
    scale = _resultant_scale(P, Q.norm(), n)
    return Polynomial(chop(coeffs, settings.TAU_COEFF * scale), tol=0.0)


def resultant_w(P: BiPolynomial, Q: BiPolynomial) -> Polynomial:
    """
    消去w的Sylvester结式 Res_w(P, Q)，作为z的多项式。

    结式恒为零当且仅当P、Q在函数域上关于w有公因式。

    Args:
        P: 关于w次数为正的二元多项式
        Q: 关于w次数为正的二元多项式

    Returns:
        z的多项式（恒为零时返回零多项式）

    Raises:
        DegenerateInputError: 当任一输入关于w的次数为0时
    """
    if P.is_zero or Q.is_zero or P.deg_w < 1 or Q.deg_w < 1:
        raise DegenerateInputError("结式要求两个输入关于w的次数都为正")
    result = resultant_in_w(P, Q)
    logger.debug(f"结式计算完成: deg_w=({P.deg_w}, {Q.deg_w}), deg_z={result.degree}")
    return result


def resultant_w_param(P: BiPolynomial, Q_by_x: Sequence[BiPolynomial]) -> BiPolynomial:
    """
    带参数X的结式：消去w，Q = Σ_k X^k·Q_k(z, w)。

    结果是关于(z, X)的二元多项式，grid[i][k]为 z^i X^k 的系数。
    在z和X两个方向的单位根网格上取值后做二维FFT。

    Args:
        P: 关于w次数为正的二元多项式
        Q_by_x: Q关于X的系数列表（每项是(z, w)的二元多项式）

    Returns:
        (z, X) 的二元多项式
    """
    if P.is_zero or P.deg_w < 1:
        raise DegenerateInputError("结式要求P关于w的次数为正")
    nonzero = [q for q in Q_by_x if not q.is_zero]
    if not nonzero:
        raise DegenerateInputError("带参数的结式要求Q不恒为零")
    m = P.deg_w
    n = max(q.deg_w for q in nonzero)
    q_deg_z = max(q.deg_z for q in nonzero)
    bound_z = n * max(P.deg_z, 0) + m * max(q_deg_z, 0)
    bound_x = m * (len(Q_by_x) - 1)

    z_nodes = _unit_circle_nodes(bound_z + 1)
    x_nodes = _unit_circle_nodes(bound_x + 1)
    pa = P.at_z(z_nodes).reshape(m + 1, -1)
    q_parts = []
    for q in Q_by_x:
        part = np.zeros((n + 1, len(z_nodes)), dtype=complex)
        if not q.is_zero:
            vals = q.at_z(z_nodes).reshape(q.deg_w + 1, -1)
            part[: q.deg_w + 1, :] = vals
        q_parts.append(part)

    values = np.zeros((len(z_nodes), len(x_nodes)), dtype=complex)
    for k in range(len(z_nodes)):
        a = pa[::-1, k]
        for l, x in enumerate(x_nodes):
            b = sum(part[:, k] * x**power for power, part in enumerate(q_parts))
            values[k, l] = _det(sylvester_matrix(a, b[::-1]))

    coeffs = np.fft.fft2(values) / values.size
    q_norm = max(q.norm() for q in nonzero) * len(Q_by_x)
    scale = _resultant_scale(P, q_norm, n)
    return BiPolynomial(chop(coeffs, settings.TAU_COEFF * scale), tol=0.0)


def subresultant_w(P: BiPolynomial, Q: BiPolynomial, d: int) -> BiPolynomial:
    """
    关于w的第d个子结式，系数为z的多项式（插值恢复）。

    当P、Q关于w的近似公因式次数恰为d时，S_d与该公因式只差一个z的因子。
    """
    m, n = P.deg_w, Q.deg_w
    bound = (n - d) * max(P.deg_z, 0) + (m - d) * max(Q.deg_z, 0)
    nodes = _unit_circle_nodes(bound + 1)
    pa = P.at_z(nodes).reshape(m + 1, -1)
    qa = Q.at_z(nodes).reshape(n + 1, -1)
    values = np.array(
        [subresultant_coeffs(pa[::-1, k], qa[::-1, k], d) for k in range(len(nodes))]
    )
    coeffs = np.fft.fft(values, axis=0) / len(nodes)
    scale = _resultant_scale(P, Q.norm(), n)
    return BiPolynomial(chop(coeffs, settings.TAU_COEFF * scale), tol=0.0)
