"""
Pydantic模式定义模块。

定义规格文件与验证报告的数据模式，用于数据校验和序列化。
命令行读入的规格文件、写出的MarginReport都使用这些模式。
复数一律写成[re, im]数对。
"""

from typing import Dict, List, Literal, Optional

import pandas as pd
from pydantic import BaseModel, Field, conlist, model_validator

from app.utils.helpers import dumps_json
from config.settings import settings

ComplexPair = conlist(float, min_length=2, max_length=2)


class GridSpec(BaseModel):
    """
    半径网格模式。

    r_min ≤ r_max，points ≥ 1，spacing为几何或线性间隔。
    """

    r_min: float = Field(..., gt=0, description="最小半径")
    r_max: float = Field(..., gt=0, description="最大半径")
    points: int = Field(10, ge=1, description="半径个数")
    spacing: Literal["geometric", "linear"] = Field("geometric", description="间隔方式")

    @model_validator(mode="after")
    def check_order(self) -> "GridSpec":
        if self.r_max < self.r_min:
            raise ValueError("r_max不能小于r_min")
        if self.points > 1 and self.r_max == self.r_min:
            raise ValueError("多个半径时r_max必须大于r_min")
        return self


class MapSpec(BaseModel):
    """
    映射（或小函数目标）模式。

    num[i][j]、den[i][j] 是 z^i w^j 的系数；den省略时为1。
    """

    label: str = Field(..., description="标签")
    num: List[List[ComplexPair]] = Field(..., description="分子系数网格")
    den: Optional[List[List[ComplexPair]]] = Field(None, description="分母系数网格")
    asserted_small: bool = Field(True, description="用户声明该目标是小函数")


class Lemma32Spec(BaseModel):
    """微分多项式递推检查的参数。"""

    max_order: int = Field(4, ge=1)
    samples: int = Field(10, ge=1)


class Lemma33Spec(BaseModel):
    """Wronski行列式缩放恒等式检查的参数。"""

    functions: List[MapSpec] = Field(default_factory=list, description="f_1 … f_k")
    g: Optional[MapSpec] = Field(None, description="缩放函数g")
    samples: int = Field(100, ge=1)


class PWSpec(BaseModel):
    """P(W - a) = P(W) 检查的参数。"""

    s: int = Field(1, ge=1)
    combination: Optional[List[ComplexPair]] = Field(None, description="a = Σ c_j a_j 的系数，默认全为1")
    samples: int = Field(20, ge=1)


class ChecksSpec(BaseModel):
    """各项检查的可选参数。"""

    lemma3_2: Lemma32Spec = Field(default_factory=Lemma32Spec)
    lemma3_3: Lemma33Spec = Field(default_factory=Lemma33Spec)
    pw: PWSpec = Field(default_factory=PWSpec)


class SlackSpec(BaseModel):
    """松弛模型的声明上限，省略时使用配置中的默认值。"""

    c0_max: Optional[float] = Field(None, ge=0)
    c1_max: Optional[float] = Field(None, ge=0)


class SpecFile(BaseModel):
    """
    函数规格文件模式（版本1）。

    function[t] 是 B_t 的升幂系数表，t = 0 … v。
    """

    version: Literal[1] = Field(..., description="规格文件版本")
    function: List[List[ComplexPair]] = Field(..., min_length=2, description="方程系数表")
    targets: List[MapSpec] = Field(default_factory=list, description="小函数目标")
    maps: List[MapSpec] = Field(default_factory=list, description="映射h")
    grid: GridSpec
    epsilon: float = Field(0.1, gt=0, description="第二基本定理中的ε")
    seed: int = Field(settings.DEFAULT_SEED, description="随机种子")
    checks: ChecksSpec = Field(default_factory=ChecksSpec)
    slack: SlackSpec = Field(default_factory=SlackSpec)

    class Config:
        """Pydantic配置"""

        extra = "forbid"


class MarginRow(BaseModel):
    """
    报告中的一行：lhs ≤ rhs 是否成立，slack = rhs - lhs。

    allowance是松弛模型在该行给出的允许量，ok为 slack ≥ -allowance。
    """

    label: str
    r: Optional[float] = None
    z: Optional[List[float]] = None
    lhs: float
    rhs: float
    slack: float
    allowance: float = 0.0
    ok: bool


class SlackModel(BaseModel):
    """松弛模型 slack ≥ -(C₀ + C₁·x)，x = log⁺(r·T(r, W))。"""

    c0: float
    c1: float
    c0_max: float
    c1_max: float


class MarginReport(BaseModel):
    """
    验证报告。

    verdict为pass当且仅当每一行在声明的松弛模型下成立。
    """

    name: str
    rows: List[MarginRow] = Field(default_factory=list)
    verdict: Literal["pass", "fail"]
    slack_model: Optional[SlackModel] = None
    diagnostics: Dict[str, List[float]] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_frame(self) -> pd.DataFrame:
        """逐行表格，z拆成实部和虚部两列。"""
        records = []
        for row in self.rows:
            record = row.model_dump(exclude={"z"})
            record["z_re"] = row.z[0] if row.z else None
            record["z_im"] = row.z[1] if row.z else None
            records.append(record)
        columns = ["label", "r", "z_re", "z_im", "lhs", "rhs", "slack", "allowance", "ok"]
        return pd.DataFrame.from_records(records, columns=columns)

    def to_json_text(self) -> str:
        return dumps_json(self.model_dump())
