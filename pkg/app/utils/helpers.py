"""
辅助函数模块。

提供通用的辅助函数，包括复数的序列化与解析、JSON输出等。
这些函数在规格文件解析、命令行输出和报告写入中复用。
"""

import json
import math
from fractions import Fraction
from typing import Any, Sequence

import numpy as np


def to_pair(value: complex) -> list[float]:
    """
    将复数转换为[re, im]数对。

    Args:
        value: 复数

    Returns:
        [实部, 虚部] 列表
    """
    value = complex(value)
    return [value.real, value.imag]


def from_pair(pair: Sequence[float]) -> complex:
    """
    将[re, im]数对转换为复数。

    Args:
        pair: 长度为2的数值序列

    Returns:
        对应的复数

    Raises:
        ValueError: 当数对长度不为2时
    """
    if len(pair) != 2:
        raise ValueError(f"复数必须写成[re, im]数对，收到: {list(pair)}")
    return complex(float(pair[0]), float(pair[1]))


def parse_complex_text(text: str) -> complex:
    """
    解析命令行中的复数文本。

    支持 "1", "2.5-3i", "0+1j", "i" 等写法（i与j等价）。

    Args:
        text: 复数文本

    Returns:
        解析后的复数

    Raises:
        ValueError: 当文本无法解析时
    """
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    if cleaned in ("j", "+j"):
        return 1j
    if cleaned == "-j":
        return -1j
    return complex(cleaned)


def _json_default(obj: Any) -> Any:
    """json.dumps无法直接处理的类型：复数、分数和numpy标量/数组。"""
    if isinstance(obj, (complex, np.complexfloating)):
        return to_pair(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"无法序列化的类型: {type(obj).__name__}")


def _finite_or_text(obj: Any) -> Any:
    # 标准JSON没有NaN/Infinity，写成字符串
    if isinstance(obj, float) and not math.isfinite(obj):
        return "NaN" if math.isnan(obj) else ("Infinity" if obj > 0 else "-Infinity")
    if isinstance(obj, dict):
        return {key: _finite_or_text(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_text(item) for item in obj]
    return obj


def dumps_json(obj: Any, indent: int = 2) -> str:
    """
    序列化为JSON文本。

    浮点数使用最短的往返表示（不超过17位有效数字），读回后与原值逐位相同。
    非有限值写成字符串 "NaN"/"Infinity"/"-Infinity"，保证输出是合法JSON。

    Args:
        obj: 由dict/list/标量组成的对象，可含复数、Fraction和numpy标量
        indent: 缩进空格数

    Returns:
        JSON文本
    """
    return json.dumps(
        _finite_or_text(obj),
        indent=indent,
        ensure_ascii=False,
        allow_nan=False,
        default=_json_default,
    )
