"""
值分布泛函模块。

计算代数体函数的Nevanlinna泛函：
- 接近函数 m(r)：圆周上 (1/v)·(1/2π)∮ Σ log⁺|w_j| dθ，梯形公式点数倍增
- 计数函数 N(r)：离散除子的闭式积分
- 分歧计数函数 N_x(r)：由单值化置换得到的分歧除子 {(z0, Σ(λ_i - 1))}，
  同样乘以1/v。这是覆盖曲面上的通常约定，不是由本模块推出的
- 特征函数 T(r) = m(r) + N(r)

积分只需要每个角度上的无序根集，不做分支匹配。
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional, Sequence

import numpy as np

from app.core.continuation import local_radius, monodromy
from app.core.equation import AlgebroidEquation, hazard_points, roots_batch
from app.core.local import DivisorList, pole_divisor
from app.utils.exceptions import CriticalPointError, DegenerateInputError, NumericalError
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)


@dataclass(frozen=True)
class CharacteristicSample:
    """单个半径上的 (r, m, N, T, N_x)，T = m + N。"""

    r: float
    m: float
    N: float
    T: float
    Nx: float

    def as_row(self) -> dict[str, float]:
        return {"r": self.r, "m": self.m, "N": self.N, "T": self.T, "Nx": self.Nx}


@dataclass(frozen=True)
class RadiusGrid:
    """
    递增的正半径序列。

    Attributes:
        radii: 半径
        quadrature_points: 每个半径的初始积分点数
    """

    radii: tuple[float, ...]
    quadrature_points: int = 64

    def __post_init__(self):
        if not self.radii:
            raise DegenerateInputError("半径网格为空")
        if any(r <= 0 for r in self.radii):
            raise DegenerateInputError("半径必须为正")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise DegenerateInputError("半径必须严格递增")

    @classmethod
    def geometric(cls, r_min: float, r_max: float, points: int) -> "RadiusGrid":
        if points == 1:
            return cls((float(r_min),))
        return cls(tuple(float(r) for r in np.geomspace(r_min, r_max, points)))

    @classmethod
    def linear(cls, r_min: float, r_max: float, points: int) -> "RadiusGrid":
        if points == 1:
            return cls((float(r_min),))
        return cls(tuple(float(r) for r in np.linspace(r_min, r_max, points)))

    @classmethod
    def build(cls, r_min: float, r_max: float, points: int, spacing: Literal["geometric", "linear"]) -> "RadiusGrid":
        if spacing == "linear":
            return cls.linear(r_min, r_max, points)
        return cls.geometric(r_min, r_max, points)


def _log_plus(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(np.where(x > 0, x, 1.0)), 0.0)


def _too_close(hazards: np.ndarray, r: float) -> bool:
    if len(hazards) == 0:
        return False
    return bool(np.any(np.abs(np.abs(hazards) - r) < settings.DELTA_R_FACTOR * r))


def proximity(eq: AlgebroidEquation, r: float, tol: Optional[float] = None) -> float:
    """
    接近函数 m(r, W)。

    梯形公式从QUAD_MIN_POINTS个等距角度开始，点数倍增（只计算新增的奇数点），
    相邻两次估计之差小于τ_quad时停止。

    Args:
        eq: 方程（可以含重复因子）
        r: 半径
        tol: 停止容差，默认settings.TAU_QUAD

    Returns:
        m(r) ≥ 0

    Raises:
        CriticalPointError: 圆周离临界点过近，需要微调r
    """
    tol = settings.TAU_QUAD if tol is None else tol
    if r <= 0:
        raise DegenerateInputError("半径必须为正")
    if _too_close(hazard_points(eq), r):
        raise CriticalPointError(f"圆周|z|={r}经过临界点，请微调r")

    def integrand(thetas: np.ndarray) -> np.ndarray:
        roots = roots_batch(eq, r * np.exp(1j * thetas))
        return np.sum(_log_plus(np.abs(roots)), axis=1)

    n = settings.QUAD_MIN_POINTS
    total = float(np.sum(integrand(2 * np.pi * np.arange(n) / n)))
    estimate = total / n / eq.v
    while n < settings.QUAD_MAX_POINTS:
        odd = 2 * np.pi * (np.arange(n) + 0.5) / n
        total += float(np.sum(integrand(odd)))
        n *= 2
        refined = total / n / eq.v
        if abs(refined - estimate) < tol:
            return refined
        estimate = refined
    logger.warning(f"圆周积分未收敛: r={r}, 点数={n}", extra={"radius": r})
    return estimate


def counting(divisor: DivisorList, r: float, v: int) -> float:
    """
    计数函数的闭式：(1/v)·[Σ_{0<|z_k|≤r} mult_k·log(r/|z_k|) + origin·log r]。

    Raises:
        DegenerateInputError: 当r ≤ 0时
    """
    if r <= 0:
        raise DegenerateInputError("计数函数要求r > 0")
    total = divisor.origin_multiplicity * math.log(r)
    for z, mult in divisor.entries:
        modulus = abs(z)
        if modulus <= r:
            total += mult * math.log(r / modulus)
    return total / v


@lru_cache(maxsize=64)
def ramification_divisor(eq: AlgebroidEquation) -> DivisorList:
    """
    分歧除子 {(z0, Σ(λ_i - 1))}，在每个有限临界点上做单值化。

    按方程对象缓存。
    """
    points = []
    for p in eq.critical_set:
        perm = monodromy(eq, p.z, local_radius(eq, p.z))
        points.append((p.z, perm.ramification_index()))
    divisor = DivisorList.from_points(points)
    logger.info(f"分歧除子构造完成: 总分歧数={divisor.total()}")
    return divisor


def ramification(eq: AlgebroidEquation, r: float) -> float:
    """分歧计数函数 N_x(r, W)。"""
    return counting(ramification_divisor(eq), r, eq.v)


def characteristic(eq: AlgebroidEquation, r: float) -> tuple[float, float, float]:
    """
    单个半径上的 (m, N, T)，不计算分歧项，可用于可约方程。
    """
    m = proximity(eq, r)
    n = counting(pole_divisor(eq), r, eq.v)
    return m, n, m + n


def snap_radius(eqs: Sequence[AlgebroidEquation], r: float) -> float:
    """
    把半径移开临界点模长（相对偏移δ_r），同时对多个方程生效。
    """
    hazards = np.concatenate([hazard_points(eq) for eq in eqs]) if eqs else np.zeros(0)
    snapped = r
    attempts = 0
    while _too_close(hazards, snapped):
        attempts += 1
        snapped = r * (1.0 + 2.0 * attempts * settings.DELTA_R_FACTOR)
        if attempts > 100:
            raise CriticalPointError(f"无法把半径{r}移开临界点")
    if snapped != r:
        logger.warning(f"半径{r}与临界点模长冲突，调整为{snapped}", extra={"radius": r})
    return snapped


def characteristic_curve(eq: AlgebroidEquation, grid: RadiusGrid) -> list[CharacteristicSample]:
    """
    在半径网格上计算 (r, m, N, T, N_x)。

    各半径之间相互独立，用WORKER_THREADS个线程并行；结果按半径顺序返回。

    Raises:
        NumericalError: 当T沿网格下降超出积分容差时
    """
    radii = [snap_radius([eq], r) for r in grid.radii]
    poles = pole_divisor(eq)
    ram = ramification_divisor(eq)

    def sample(r: float) -> CharacteristicSample:
        m = proximity(eq, r)
        n = counting(poles, r, eq.v)
        return CharacteristicSample(r=r, m=m, N=n, T=m + n, Nx=counting(ram, r, eq.v))

    with ThreadPoolExecutor(max_workers=max(1, settings.WORKER_THREADS)) as pool:
        samples = list(pool.map(sample, radii))

    for prev, cur in zip(samples, samples[1:]):
        if cur.T < prev.T - 10 * settings.TAU_QUAD:
            raise NumericalError(f"特征函数不单调: T({prev.r})={prev.T}, T({cur.r})={cur.T}")
    logger.info(f"特征函数曲线计算完成: {len(samples)}个半径")
    return samples
