"""Run result persistence: per-video records and batch summaries.

Layout: ``runs/<run_id>/<video_id>.json`` plus ``runs/<run_id>/summary.json``.
Writes are atomic (write-temp-then-rename); record JSON is canonical
(sorted keys) so determinism checks can compare bytes.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from ..errors import EvalError
from ..metrics import MetricScores
from ..reports import AnomalyReport

SUMMARY_FILE = "summary.json"
EVAL_FILE = "eval.json"
_RESERVED_FILES = frozenset({SUMMARY_FILE, EVAL_FILE})

# Wall-clock dependent fields, excluded from byte-level determinism checks.
TIMING_FIELDS = ("timings", "fps", "wall_seconds_total")


class StageTimings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    stages: dict[str, float] = {}
    wall_seconds: float = Field(ge=0)
    duration_frames: int = Field(ge=0)


class RunArtifacts(BaseModel):
    """Glance-stage intermediates persisted for ablation diffing."""

    model_config = ConfigDict(extra="forbid")

    caption: str = ""
    prompts_static: list[str] = []
    prompts_dynamic: list[str] = []
    curve: list[float] = []
    static_curve: list[float] | None = None
    dynamic_curve: list[float] | None = None
    peaks: list[int] = []
    screened: list[int] = []


class RunRecord(BaseModel):
    """Everything recorded for one successfully processed video."""

    model_config = ConfigDict(extra="forbid")

    video_id: str
    report: AnomalyReport
    qa_chosen: list[int | None] = []
    metrics: MetricScores | None = None
    timings: StageTimings
    config_fingerprint: str
    artifacts: RunArtifacts = RunArtifacts()


class FailureRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    video_id: str
    stage: str = ""
    error: str


class RunSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run_id: str
    config_fingerprint: str
    video_ids: list[str] = []
    completed: list[str] = []
    failures: list[FailureRecord] = []
    duration_frames_total: int = 0
    wall_seconds_total: float = 0.0
    fps: float = 0.0


def _dump_canonical(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def record_path(run_dir: str | Path, video_id: str) -> Path:
    return Path(run_dir) / f"{video_id}.json"


def write_run_record(run_dir: str | Path, record: RunRecord) -> Path:
    path = record_path(run_dir, record.video_id)
    _atomic_write(path, _dump_canonical(record))
    return path


def load_run_record(run_dir: str | Path, video_id: str) -> RunRecord:
    path = record_path(run_dir, video_id)
    if not path.is_file():
        raise EvalError(f"missing run record for {video_id!r}", video_ids=[video_id])
    return RunRecord.model_validate_json(path.read_text(encoding="utf-8"))


def list_run_records(run_dir: str | Path) -> list[RunRecord]:
    run_dir = Path(run_dir)
    out = []
    for path in sorted(run_dir.glob("*.json")):
        if path.name in _RESERVED_FILES:
            continue
        out.append(RunRecord.model_validate_json(path.read_text(encoding="utf-8")))
    return out


def write_summary(run_dir: str | Path, summary: RunSummary) -> Path:
    path = Path(run_dir) / SUMMARY_FILE
    _atomic_write(path, _dump_canonical(summary))
    return path


def load_summary(run_dir: str | Path) -> RunSummary:
    path = Path(run_dir) / SUMMARY_FILE
    if not path.is_file():
        raise EvalError(f"no {SUMMARY_FILE} under {run_dir}")
    return RunSummary.model_validate_json(path.read_text(encoding="utf-8"))


def strip_timing(payload: Any) -> Any:
    """Recursively drop wall-clock fields for byte-determinism comparisons."""
    if isinstance(payload, dict):
        return {
            key: strip_timing(value)
            for key, value in payload.items()
            if key not in TIMING_FIELDS and key != "timing"
        }
    if isinstance(payload, list):
        return [strip_timing(item) for item in payload]
    return payload
