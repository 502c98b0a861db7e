"""Request/response models for the benchmark service API."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict

from ..bench.ablate import AblationResult
from ..bench.config import BenchConfig
from ..bench.evaluate import SummaryTable
from ..dataset.results import RunSummary
from ..reports import AnomalyReport


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: BenchConfig


class RunResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run_id: str
    run_dir: str
    exit_code: int
    summary: RunSummary


class EvalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: BenchConfig
    run_dir: str


class EvalResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    table: SummaryTable
    table_text: str


class AblateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: BenchConfig
    variants: dict[str, dict[str, bool]] | None = None


class AblateResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    result: AblationResult
    table_text: str


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    annotations_path: str


class ValidateResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ok: bool
    count: int
    errors: list[str] = []


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: BenchConfig
    video_id: str


class AnalyzeResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    video_id: str
    report: AnomalyReport
