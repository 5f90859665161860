"""
实验报告模型与输出

报告用 pydantic 模型描述，未知字段一律拒绝；JSON 按键排序，浮点数取最短往返表示，
CSV 用 pandas 输出 12 位有效数字。
"""

import json
import math
from typing import Any, Dict, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import __version__
from ..options import Options, resolve
from ..utils.file import atomic_write_text

# 报告 schema 的版本，字段变化时递增
SCHEMA_VERSION = "1"

# CSV 的浮点格式
CSV_FLOAT_FORMAT = "%.12g"

Scalar = Union[bool, int, float, str, None]


def relative_error(numeric: float, closed_form: float) -> float:
    """相对误差 |numeric - closed_form| / max(|closed_form|, 1e-300)"""
    return abs(numeric - closed_form) / max(abs(closed_form), 1e-300)


def finite_or_none(value: Optional[float]) -> Optional[float]:
    """非有限值记为 None，JSON 里输出 null"""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class ExperimentReport(BaseModel):
    """单个实验的报告"""
    model_config = ConfigDict(extra="forbid")

    experiment: str
    params: Dict[str, Union[Scalar, List[Scalar]]]
    closed_form: Dict[str, Optional[float]] = Field(default_factory=dict)
    numeric: Dict[str, Optional[float]] = Field(default_factory=dict)
    discrepancies: Dict[str, Optional[float]] = Field(default_factory=dict)
    verdicts: Dict[str, str] = Field(default_factory=dict)
    checks: Dict[str, bool] = Field(default_factory=dict)
    tables: Dict[str, str] = Field(default_factory=dict)  # 表名 -> CSV 文件名
    skipped: List[str] = Field(default_factory=list)
    runtime_ms: int = Field(ge=0)
    version: str

    @model_validator(mode="after")
    def _discrepancy_for_every_pair(self):
        missing = sorted(set(self.numeric) & set(self.closed_form) - set(self.discrepancies))
        if missing:
            raise ValueError(f"numeric entries with a closed form but no discrepancy: {missing}")
        return self

    @property
    def passed(self) -> bool:
        """所有检查都通过"""
        return all(self.checks.values())


class CriterionStatus(BaseModel):
    """验收标准的汇总状态"""
    model_config = ConfigDict(extra="forbid")

    status: str = Field(pattern="^(pass|fail|skipped)$")
    experiments: List[str]
    failed_checks: List[str] = Field(default_factory=list)


class ReportBundle(BaseModel):
    """report 子命令输出的完整报告"""
    model_config = ConfigDict(extra="forbid")

    schema_version: str = SCHEMA_VERSION
    version: str
    threads: int = Field(ge=1)
    fast: bool
    criteria: Dict[str, CriterionStatus]
    experiments: List[ExperimentReport]
    runtime_ms: int = Field(ge=0)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.criteria.values())


class ReportBuilder:
    """逐项收集一个实验的结果，最后生成 ExperimentReport"""

    def __init__(self, experiment: str, params: Dict[str, Any]):
        self.experiment = experiment
        self.params = dict(params)
        self.closed_form: Dict[str, Optional[float]] = {}
        self.numeric: Dict[str, Optional[float]] = {}
        self.discrepancies: Dict[str, Optional[float]] = {}
        self.verdicts: Dict[str, str] = {}
        self.checks: Dict[str, bool] = {}
        self.skipped: List[str] = []
        self.frames: Dict[str, pd.DataFrame] = {}

    def compare(self, name: str, numeric: float, closed_form: float) -> float:
        """同时记录数值结果、闭式与相对误差，返回相对误差"""
        self.numeric[name] = finite_or_none(numeric)
        self.closed_form[name] = finite_or_none(closed_form)
        error = relative_error(float(numeric), float(closed_form))
        self.discrepancies[name] = finite_or_none(error)
        return error

    def check(self, name: str, passed: bool) -> bool:
        self.checks[name] = bool(passed)
        return bool(passed)

    def skip(self, name: str) -> None:
        self.skipped.append(name)

    def table(self, name: str, frame: pd.DataFrame) -> None:
        self.frames[name] = frame

    def build(self, runtime_ms: int = 0) -> ExperimentReport:
        return ExperimentReport(
            experiment=self.experiment,
            params=self.params,
            closed_form=self.closed_form,
            numeric=self.numeric,
            discrepancies=self.discrepancies,
            verdicts=self.verdicts,
            checks=self.checks,
            tables={name: f"{self.experiment}_{name}.csv" for name in self.frames},
            skipped=self.skipped,
            runtime_ms=runtime_ms,
            version=__version__,
        )


def report_json(model: BaseModel, options: Optional[Options] = None) -> str:
    """报告的 JSON 文本，键排序，末尾带换行"""
    payload = model.model_dump(mode="python")
    return json.dumps(payload, indent=resolve(options).json_indent, sort_keys=True, allow_nan=False) + "\n"


def csv_text(frame: pd.DataFrame) -> str:
    """表格的 CSV 文本"""
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def write_report(model: BaseModel, path: str, options: Optional[Options] = None) -> None:
    atomic_write_text(path, report_json(model, options))


def write_csv(frame: pd.DataFrame, path: str) -> None:
    atomic_write_text(path, csv_text(frame))


def report_schema() -> Dict[str, Any]:
    """ReportBundle 的 JSON schema（包含 ExperimentReport 的定义）"""
    schema = ReportBundle.model_json_schema()
    schema["$id"] = f"cayley-spectra/report.schema.v{SCHEMA_VERSION}.json"
    return schema
