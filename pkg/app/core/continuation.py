"""
解析延拓模块。

沿路径数值跟踪v个分支（Euler预测 + 逐点求根校正 + 最优匹配），
计算绕临界点和绕无穷远的单值化置换，并在正则点用隐函数递推求各分支的Taylor系数。

匹配规则：每一步用linear_sum_assignment做最近邻匹配，并要求次近距离至少是匹配距离的3倍；
不满足时步长减半，到最小步长仍失败则报错，不允许静默错配。
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.core.equation import AlgebroidEquation, roots_at
from app.core.polyalg import series_derivatives
from app.utils.exceptions import ContinuationError, CriticalPointError
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)

# 步长最多减半的次数
_MAX_HALVINGS = 24
# 匹配的分离裕度
_SEPARATION = 3.0


@dataclass(frozen=True)
class PathSpec:
    """
    延拓路径：圆周（可绕多圈）或线段，参数s ∈ [0, 1]。

    Attributes:
        kind: "circle" 或 "segment"
        center: 圆心
        radius: 半径
        turns: 圈数，正数为逆时针
        start: 线段起点
        end: 线段终点
        steps: 初始步数
    """

    kind: Literal["circle", "segment"]
    center: complex = 0j
    radius: float = 1.0
    turns: int = 1
    start: complex = 0j
    end: complex = 0j
    steps: int = 64

    @classmethod
    def circle(cls, center: complex, radius: float, turns: int = 1, steps: int = 64) -> "PathSpec":
        return cls("circle", center=complex(center), radius=float(radius), turns=turns, steps=steps)

    @classmethod
    def segment(cls, start: complex, end: complex, steps: int = 16) -> "PathSpec":
        return cls("segment", start=complex(start), end=complex(end), steps=steps)

    def point(self, s: float) -> complex:
        if self.kind == "circle":
            return self.center + self.radius * np.exp(2j * np.pi * self.turns * s)
        return self.start + (self.end - self.start) * s

    @property
    def initial_point(self) -> complex:
        return self.point(0.0)

    @property
    def final_point(self) -> complex:
        return self.point(1.0)

    def clearance(self, points: np.ndarray) -> float:
        """路径到一组点的最小距离。"""
        if len(points) == 0:
            return float("inf")
        points = np.asarray(points, dtype=complex)
        if self.kind == "circle":
            return float(np.min(np.abs(np.abs(points - self.center) - self.radius)))
        d = self.end - self.start
        if d == 0:
            return float(np.min(np.abs(points - self.start)))
        s = np.clip(((points - self.start) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
        return float(np.min(np.abs(points - (self.start + s * d))))


@dataclass(frozen=True)
class TrackStep:
    """一个被接受的延拓步。"""

    s: float
    z: complex
    h: float
    error: float
    margin: float


@dataclass(frozen=True)
class TrackResult:
    values: np.ndarray
    steps: tuple[TrackStep, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class MonodromyPermutation:
    """
    单值化置换：perm[i] = j 表示从第i个分支出发，绕一圈后到达第j个分支的起点值。

    cycles中的每个循环长度就是该点上方一个分支组的层数λ。
    """

    perm: tuple[int, ...]
    base_point: complex
    cycles: tuple[tuple[int, ...], ...]

    @classmethod
    def from_perm(cls, perm: Sequence[int], base_point: complex) -> "MonodromyPermutation":
        perm = tuple(int(p) for p in perm)
        if sorted(perm) != list(range(len(perm))):
            raise ContinuationError(f"单值化结果不是置换: {perm}")
        seen = set()
        cycles = []
        for i in range(len(perm)):
            if i in seen:
                continue
            cycle = [i]
            seen.add(i)
            j = perm[i]
            while j != i:
                cycle.append(j)
                seen.add(j)
                j = perm[j]
            cycles.append(tuple(cycle))
        return cls(perm, complex(base_point), tuple(cycles))

    @property
    def cycle_lengths(self) -> list[int]:
        return sorted((len(c) for c in self.cycles), reverse=True)

    @property
    def is_identity(self) -> bool:
        return all(i == p for i, p in enumerate(self.perm))

    def ramification_index(self) -> int:
        """Σ(λ_i - 1)。"""
        return len(self.perm) - len(self.cycles)

    def compose(self, other: "MonodromyPermutation") -> "MonodromyPermutation":
        """先走self再走other。"""
        return MonodromyPermutation.from_perm([other.perm[p] for p in self.perm], self.base_point)

    def inverse(self) -> "MonodromyPermutation":
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        return MonodromyPermutation.from_perm(inv, self.base_point)

    def __str__(self) -> str:
        nontrivial = [c for c in self.cycles if len(c) > 1]
        if not nontrivial:
            return "()"
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in nontrivial)


def _branch_slopes(eq: AlgebroidEquation, z0: complex, values: np.ndarray) -> np.ndarray:
    """w' = -Ψ_z/Ψ_W 在各分支上的值。"""
    psi = eq.bipoly
    dz = psi.partial_z()(z0, values)
    dw = psi.partial_w()(z0, values)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.where(dw != 0, -dz / np.where(dw == 0, 1.0, dw), 0.0)
    return slopes


def _match(predicted: np.ndarray, roots: np.ndarray) -> tuple[np.ndarray, float, float]:
    """最优匹配，返回 (按predicted排列的roots, 最大误差, 最小分离比)。"""
    cost = np.abs(predicted[:, None] - roots[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(predicted), dtype=int)
    order[rows] = cols
    matched = roots[order]
    dist = np.abs(predicted - matched)
    floor = settings.TAU_TRACK * (1.0 + np.max(np.abs(roots)))
    if len(roots) == 1:
        return matched, float(dist[0]), float("inf")
    masked = cost.copy()
    masked[np.arange(len(predicted)), order] = np.inf
    second = np.min(masked, axis=1)
    margin = float(np.min(second / np.maximum(dist, floor)))
    return matched, float(np.max(dist)), margin


def track(
    eq: AlgebroidEquation,
    path: PathSpec,
    start: Sequence[complex],
    record_steps: bool = False,
) -> TrackResult:
    """
    沿路径延拓一组有序的分支值。

    Args:
        eq: 无重复因子的方程
        path: 延拓路径，到临界点的距离不小于δ_path
        start: 路径起点处的v个根（任意顺序）
        record_steps: 是否记录步长日志

    Returns:
        TrackResult，values与start一一对应

    Raises:
        CriticalPointError: 路径离临界点过近
        ContinuationError: 最小步长下匹配裕度仍不足
    """
    crit = eq.critical_set.values()
    clearance = path.clearance(crit)
    if clearance < settings.DELTA_PATH:
        raise CriticalPointError(f"路径离临界点过近: 距离={clearance:.3g}")

    values = np.asarray(start, dtype=complex)
    if len(values) != eq.v or not np.all(np.isfinite(values)):
        raise ContinuationError("起点分支值的个数或取值不合法")
    check, _, _ = _match(values, roots_at(eq, path.initial_point))
    if np.max(np.abs(check - values)) > 1e-6 * (1.0 + np.max(np.abs(values))):
        raise ContinuationError("起点分支值与起点处的根不一致")

    h0 = 1.0 / max(path.steps, 1)
    h_min = h0 / 2**_MAX_HALVINGS
    h = h0
    s = 0.0
    steps: list[TrackStep] = []
    while s < 1.0:
        h = min(h, 1.0 - s)
        z0, z1 = path.point(s), path.point(s + h)
        predicted = values + _branch_slopes(eq, z0, values) * (z1 - z0)
        roots = roots_at(eq, z1)
        if not np.all(np.isfinite(roots)):
            raise ContinuationError(f"路径经过极点 z={z1}")
        matched, error, margin = _match(predicted, roots)
        if margin >= _SEPARATION:
            values = matched
            s = 1.0 if s + h >= 1.0 - 1e-15 else s + h
            if record_steps:
                steps.append(TrackStep(s, z1, h, error, margin))
            h = min(2.0 * h, h0)
        else:
            h /= 2.0
            if h < h_min:
                raise ContinuationError(f"路径离临界点过近: s={s:.6g}, z={z0}")
    return TrackResult(values, tuple(steps))


def local_radius(eq: AlgebroidEquation, z0: complex) -> float:
    others = [p.z for p in eq.critical_set if abs(p.z - z0) > settings.TAU_MERGE * (1.0 + abs(z0))]
    if not others:
        return 0.5
    return min(0.5, 0.5 * min(abs(z - z0) for z in others))


def monodromy(eq: AlgebroidEquation, z0: complex, radius: Optional[float] = None) -> MonodromyPermutation:
    """
    绕临界点z0一圈（逆时针）的单值化置换。

    Args:
        eq: 无重复因子的方程
        z0: 临界点
        radius: 圆周半径，默认取到其他临界点距离的一半（不超过0.5）

    Raises:
        CriticalPointError: z0不是临界点，或圆周内含有其他临界点
    """
    crit = eq.critical_set
    if not crit.contains(z0, tol=1e-6):
        raise CriticalPointError(f"z0={z0}不是临界点")
    center = min((p.z for p in crit), key=lambda c: abs(c - z0))
    radius = local_radius(eq, center) if radius is None else float(radius)
    for p in crit:
        if p.z != center and abs(p.z - center) < radius + settings.DELTA_PATH:
            raise CriticalPointError(f"半径{radius}的圆周内含有另一个临界点{p.z}")
    return _loop_permutation(eq, PathSpec.circle(center, radius))


def monodromy_at_infinity(eq: AlgebroidEquation, radius: Optional[float] = None) -> MonodromyPermutation:
    """沿包含全部有限临界点的大圆周的单值化置换。"""
    moduli = eq.critical_set.moduli()
    bound = float(np.max(moduli)) if len(moduli) else 0.0
    radius = 2.0 * bound + 1.0 if radius is None else float(radius)
    if radius < bound + settings.DELTA_PATH:
        raise CriticalPointError(f"半径{radius}没有包含全部临界点")
    return _loop_permutation(eq, PathSpec.circle(0j, radius, steps=128))


def _loop_permutation(eq: AlgebroidEquation, path: PathSpec) -> MonodromyPermutation:
    start = roots_at(eq, path.initial_point)
    result = track(eq, path, start)
    perm = _match_indices(result.values, start)
    monodromy_perm = MonodromyPermutation.from_perm(perm, path.initial_point)
    logger.info(
        f"单值化置换: {monodromy_perm}",
        extra={"z0": path.center, "radius": path.radius},
    )
    return monodromy_perm


def _match_indices(end: np.ndarray, start: np.ndarray) -> np.ndarray:
    """end[i] 与哪个 start[j] 重合。"""
    cost = np.abs(end[:, None] - start[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(end), dtype=int)
    perm[rows] = cols
    return perm


# ---------------------------------------------------------------------------
# 分支的Taylor系数
# ---------------------------------------------------------------------------


def _psi_w_scale(eq: AlgebroidEquation, z0: complex, w0: complex) -> float:
    vals = np.abs(eq.coefficient_values(z0))
    return float(np.max(vals)) * eq.v * (1.0 + abs(w0)) ** (eq.v - 1)


def branch_series(eq: AlgebroidEquation, z0: complex, order: int) -> np.ndarray:
    """
    各分支在z0处的Taylor系数 w(z0 + t) = Σ c_k t^k。

    c_k 由 Ψ(z0 + t, w(t)) 的t^k系数为零递推得到：
    先令c_k = 0求出该系数e_k，再取 c_k = -e_k / Ψ_W(z0, w0)。

    Args:
        eq: 方程
        z0: 正则点
        order: 截断阶数

    Returns:
        形状为 (v, order+1) 的数组，行顺序与roots_at(eq, z0)一致

    Raises:
        ContinuationError: 分支在z0处为∞或Ψ_W为零（分歧点处导数无定义）
    """
    roots = roots_at(eq, z0)
    if not np.all(np.isfinite(roots)):
        raise ContinuationError(f"z0={z0}处有分支为∞，导数无定义")
    psi = eq.bipoly
    dpsi = psi.partial_w()
    out = np.zeros((eq.v, order + 1), dtype=complex)
    for b, w0 in enumerate(roots):
        dw = complex(dpsi(z0, w0))
        if abs(dw) <= settings.TAU_DERIV * _psi_w_scale(eq, z0, w0):
            raise ContinuationError(f"分歧点处导数无定义: z0={z0}, w={w0}")
        series = np.zeros(order + 1, dtype=complex)
        series[0] = w0
        for k in range(1, order + 1):
            e = psi.series_along(z0, series, k)
            series[k] = -e[k] / dw
        residual = psi.series_along(z0, series, order)
        scale = _psi_w_scale(eq, z0, w0) * (1.0 + np.max(np.abs(series)))
        if np.max(np.abs(residual)) > settings.TAU_DERIV * scale:
            logger.warning(f"分支Taylor系数的残差偏大: z0={z0}, 分支={b}")
        out[b] = series
    return out


def branch_derivatives(eq: AlgebroidEquation, z0: complex, order: int) -> np.ndarray:
    """
    各分支在z0处的导数 (w, w', …, w^(n))。

    Returns:
        形状为 (v, order+1) 的数组

    Example:
        >>> branch_derivatives(sqrt_z_equation, 4, 2)  # 分支w=2: (2, 1/4, -1/32)
    """
    series = branch_series(eq, z0, order)
    return np.array([series_derivatives(row) for row in series])


def regular_base_point(eq: AlgebroidEquation) -> complex:
    """远离全部临界点的正则基点（到临界点的距离至少1.5）。"""
    moduli = eq.critical_set.moduli()
    bound = float(np.max(moduli)) if len(moduli) else 0.0
    return (bound + 1.5) * np.exp(0.3j)


def sample_branch_points(
    eq: AlgebroidEquation,
    count: int,
    seed: int,
    branch: int = 0,
    radius: float = 1.0,
) -> list[tuple[complex, np.ndarray]]:
    """
    在基点附近的圆盘内取随机正则点，并把固定分支延拓过去。

    Args:
        eq: 无重复因子的方程
        count: 采样点数
        seed: 随机种子
        branch: 基点处分支的序号（按roots_at的顺序）
        radius: 圆盘半径

    Returns:
        (z, 该点处全部分支值) 列表，分支值的第0个是被跟踪的分支
    """
    base = regular_base_point(eq)
    base_roots = roots_at(eq, base)
    order = [branch] + [i for i in range(eq.v) if i != branch]
    base_roots = base_roots[order]
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        rho = radius * math.sqrt(rng.uniform(0.0, 1.0))
        theta = rng.uniform(0.0, 2 * np.pi)
        z = base + rho * np.exp(1j * theta)
        result = track(eq, PathSpec.segment(base, z), base_roots)
        points.append((complex(z), result.values))
    return points
