"""
验证套件服务模块。

把解析后的规格文件转换成领域对象（方程、目标、映射、半径网格），
并执行各项运算与验证，负责报告的落盘。命令行入口只做参数解析和输出。
"""

from __future__ import annotations

import json
import re
from functools import cached_property
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.core import verify
from app.core.continuation import MonodromyPermutation, monodromy
from app.core.equation import AlgebroidEquation
from app.core.mapping import (
    InfiniteFunction,
    MapExpr,
    SmallFunctionTarget,
    map_derivative,
    map_invert,
    map_negate,
    pushforward,
)
from app.core.nevanlinna import RadiusGrid, characteristic_curve
from app.core.polyalg import BiPolynomial, Polynomial
from app.core.schemas import MapSpec, MarginReport, SpecFile
from app.utils.exceptions import AlgebroidError, SpecFileError, TargetError
from app.utils.helpers import from_pair
from app.utils.logger import get_logger

logger = get_logger(__name__)

VERIFY_NAMES = ("thm2.5", "lemma3.1", "lemma3.2", "lemma3.3", "pw", "smt", "first-main")
OP_NAMES = ("negate", "invert", "derivative", "pushforward")
CSV_FLOAT_FORMAT = "%.17g"


def _find_line(text: str, loc: tuple) -> int:
    """在文件文本中定位出错键所在的行号（找不到时为1）。"""
    keys = [k for k in loc if isinstance(k, str)]
    for key in reversed(keys):
        match = re.search(r'"%s"\s*:' % re.escape(key), text)
        if match:
            return text.count("\n", 0, match.start()) + 1
    return 1


def load_spec(path: Union[str, Path]) -> SpecFile:
    """
    读取并校验规格文件。

    Args:
        path: JSON规格文件路径

    Returns:
        SpecFile

    Raises:
        SpecFileError: 文件不存在、JSON语法错误或字段校验失败，信息包含键名和行号
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecFileError(f"无法读取规格文件{path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFileError(f"规格文件{path}第{e.lineno}行: JSON语法错误: {e.msg}") from e
    try:
        spec = SpecFile.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first.get("loc", ()))
        key = ".".join(str(part) for part in loc) or "<root>"
        line = _find_line(text, loc)
        raise SpecFileError(f"规格文件{path}第{line}行: 键'{key}': {first.get('msg')}") from e
    logger.info("规格文件加载成功", extra={"spec_path": str(path)})
    return spec


def grid_from_pairs(rows: list[list[list[float]]]) -> np.ndarray:
    """[re, im]数对组成的（可能参差的）二维表转换为复数矩阵，短行补零。"""
    width = max((len(row) for row in rows), default=0)
    grid = np.zeros((len(rows), max(width, 1)), dtype=complex)
    for i, row in enumerate(rows):
        for j, pair in enumerate(row):
            grid[i, j] = from_pair(pair)
    return grid


def map_from_spec(spec: MapSpec) -> MapExpr:
    num = BiPolynomial(grid_from_pairs(spec.num))
    den = BiPolynomial(grid_from_pairs(spec.den)) if spec.den is not None else None
    return MapExpr.create(num, den)


class SuiteService:
    """
    验证套件服务类。

    提供：
    - 规格文件到领域对象的转换
    - 特征函数曲线的计算与CSV输出
    - 方程运算（负元、逆元、导函数、推前）
    - 单值化置换
    - 各项验证与报告落盘
    """

    def __init__(self, spec: SpecFile, spec_path: Optional[str] = None, seed: Optional[int] = None):
        """
        初始化服务。

        Args:
            spec: 已校验的规格文件
            spec_path: 规格文件路径（用于日志）
            seed: 覆盖规格文件中的随机种子
        """
        self.spec = spec
        self.spec_path = spec_path
        self.seed = spec.seed if seed is None else seed

    @classmethod
    def from_path(cls, path: Union[str, Path], seed: Optional[int] = None) -> "SuiteService":
        return cls(load_spec(path), str(path), seed)

    # ---- 领域对象 ----

    @cached_property
    def equation(self) -> AlgebroidEquation:
        polys = [Polynomial([from_pair(p) for p in row]) for row in self.spec.function]
        return AlgebroidEquation.from_polynomials(polys)

    @cached_property
    def targets(self) -> list[SmallFunctionTarget]:
        return [
            SmallFunctionTarget(map_from_spec(t), t.label, t.asserted_small)
            for t in self.spec.targets
        ]

    @cached_property
    def maps(self) -> dict[str, MapExpr]:
        return {m.label: map_from_spec(m) for m in self.spec.maps}

    @cached_property
    def grid(self) -> RadiusGrid:
        g = self.spec.grid
        return RadiusGrid.build(g.r_min, g.r_max, g.points, g.spacing)

    def map_by_label(self, label: Optional[str]) -> MapExpr:
        if not self.maps:
            raise TargetError("规格文件中没有定义映射(maps)")
        if label is None:
            return next(iter(self.maps.values()))
        if label not in self.maps:
            raise TargetError(f"未找到映射: {label}")
        return self.maps[label]

    # ---- 运算 ----

    def characteristic_frame(self) -> pd.DataFrame:
        """特征函数曲线，列为 r, m, N, T, Nx。"""
        samples = characteristic_curve(self.equation, self.grid)
        return pd.DataFrame([s.as_row() for s in samples], columns=["r", "m", "N", "T", "Nx"])

    def write_characteristic(self, out: Union[str, Path]) -> pd.DataFrame:
        frame = self.characteristic_frame()
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out, index=False, float_format=CSV_FLOAT_FORMAT)
        logger.info(f"特征函数曲线已写入: {out}", extra={"spec_path": self.spec_path})
        return frame

    def run_op(self, op: str, map_label: Optional[str] = None) -> Union[AlgebroidEquation, InfiniteFunction]:
        """
        执行方程运算。

        Args:
            op: negate / invert / derivative / pushforward
            map_label: pushforward使用的映射标签，省略时取第一个映射
        """
        eq = self.equation
        if op == "negate":
            return map_negate(eq)
        if op == "invert":
            return map_invert(eq)
        if op == "derivative":
            return map_derivative(eq)
        if op == "pushforward":
            return pushforward(self.map_by_label(map_label), eq)
        raise AlgebroidError(f"未知的运算: {op}")

    def run_monodromy(self, center: complex, radius: Optional[float]) -> MonodromyPermutation:
        return monodromy(self.equation, center, radius)

    def run_verify(self, name: str) -> MarginReport:
        """
        执行一项验证。

        Raises:
            AlgebroidError: 验证过程中的任何错误（非项目异常会被包装）
        """
        try:
            return self._dispatch(name)
        except AlgebroidError:
            raise
        except Exception as e:
            logger.error(f"验证{name}执行失败: {e}", exc_info=True, extra={"check": name})
            raise AlgebroidError(f"验证{name}执行失败: {e}") from e

    def _dispatch(self, name: str) -> MarginReport:
        eq, grid, slack = self.equation, self.grid, self.spec.slack
        checks = self.spec.checks
        if name == "thm2.5":
            return self._thm_2_5_all()
        if name == "lemma3.1":
            return verify.check_lemma_3_1(eq, self.targets, grid, slack.c0_max, slack.c1_max)
        if name == "lemma3.2":
            return verify.check_lemma_3_2(eq, checks.lemma3_2.max_order, checks.lemma3_2.samples, self.seed)
        if name == "lemma3.3":
            fs, g = self._lemma_3_3_functions()
            return verify.check_lemma_3_3(fs, g, eq, checks.lemma3_3.samples, self.seed)
        if name == "pw":
            combination = (
                [from_pair(p) for p in checks.pw.combination] if checks.pw.combination else None
            )
            return verify.check_pw_invariance(
                eq, self.targets, checks.pw.s, checks.pw.samples, combination, self.seed
            )
        if name == "smt":
            return verify.check_smt(eq, self.targets, self.spec.epsilon, grid, slack.c0_max, slack.c1_max)
        if name == "first-main":
            return verify.check_first_main(eq, self.targets, grid)
        raise AlgebroidError(f"未知的验证项: {name}")

    def _thm_2_5_all(self) -> MarginReport:
        if not self.maps:
            raise TargetError("thm2.5需要在maps中定义至少一个映射")
        rows = []
        for label, h in self.maps.items():
            report = verify.check_thm_2_5(self.equation, h, self.grid)
            rows += [row.model_copy(update={"label": f"{label}:{row.label}"}) for row in report.rows]
        verdict = "pass" if all(row.ok for row in rows) else "fail"
        return MarginReport(name="thm2.5", rows=rows, verdict=verdict)

    def _lemma_3_3_functions(self) -> tuple[list[MapExpr], MapExpr]:
        spec = self.spec.checks.lemma3_3
        if spec.functions:
            fs = [map_from_spec(f) for f in spec.functions]
        else:
            z = MapExpr.variable_z()
            fs = [MapExpr.constant(1.0), z, z * z]
        g = map_from_spec(spec.g) if spec.g is not None else MapExpr.variable_z() + 1.0
        return fs, g

    # ---- 报告 ----

    def write_report(self, report: MarginReport, out_dir: Union[str, Path]) -> tuple[Path, Path]:
        """写出 <name>.json 与 <name>.csv。"""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path = out_dir / f"{report.name}.json"
        csv_path = out_dir / f"{report.name}.csv"
        json_path.write_text(report.to_json_text() + "\n", encoding="utf-8")
        report.to_frame().to_csv(csv_path, index=False, float_format=CSV_FLOAT_FORMAT)
        logger.info(
            f"报告已写入: {json_path}, {csv_path}",
            extra={"check": report.name, "spec_path": self.spec_path},
        )
        return json_path, csv_path
