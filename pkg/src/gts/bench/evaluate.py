"""Judge-backed evaluation of a completed run directory."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel, ConfigDict

from ..dataset.annotations import VideoAnnotation
from ..dataset.results import EVAL_FILE, RunRecord, load_summary, record_path
from ..errors import EvalError
from ..gateway.client import GatewayClient
from ..gateway.protocol import JudgeRequest
from ..metrics import (
    AspectScores,
    MetricScores,
    aggregate_au,
    interval_set_iou,
    jeaug,
    qa_accuracy,
)
from ..taxonomy import ALL_LABELS, NORMAL

log = logging.getLogger(__name__)

ACCEPTABLE_JEAUG = 3.0
ACCEPTABLE_FPS = 30.0


class VideoEval(BaseModel):
    model_config = ConfigDict(extra="forbid")

    video_id: str
    category_true: str
    category_pred: str
    aspects: AspectScores
    au: float
    metrics: MetricScores | None = None
    qa_correct: int
    qa_total: int


class CategoryRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    category: str
    count: int
    au_mean: float | None = None
    jeaug_mean: float | None = None
    qa_accuracy: float | None = None


class OverallMetrics(BaseModel):
    model_config = ConfigDict(extra="forbid")

    au_mean: float | None = None
    jeaug_mean: float | None = None
    qa_accuracy: float | None = None
    fps: float = 0.0
    acceptable: bool = False


class SummaryTable(BaseModel):
    """Benchmark results: one overall row plus a row per category."""

    model_config = ConfigDict(extra="forbid")

    run_id: str
    overall: OverallMetrics
    per_category: list[CategoryRow]
    videos: list[VideoEval]


def _mean(values: Sequence[float]) -> float | None:
    return sum(values) / len(values) if values else None


def evaluate_run(
    run_dir: str | Path,
    annotations: Sequence[VideoAnnotation],
    judge: GatewayClient,
) -> SummaryTable:
    """Score a run against its annotations; judge is the only backend used.

    Normal videos contribute understanding and QA numbers but are excluded
    from every IoU-derived term. Re-evaluating the same directory with the
    same (scripted) judge is deterministic.
    """
    run_dir = Path(run_dir)
    summary = load_summary(run_dir)
    failed_ids = {f.video_id for f in summary.failures}
    missing = [
        a.video_id
        for a in annotations
        if not record_path(run_dir, a.video_id).is_file() and a.video_id not in failed_ids
    ]
    if missing:
        raise EvalError(f"missing run records for: {', '.join(missing)}", video_ids=missing)

    videos: list[VideoEval] = []
    wall_total = 0.0
    frames_total = 0
    qa_pairs_all: list[tuple[int | None, int]] = []
    for annotation in annotations:
        if annotation.video_id in failed_ids:
            continue
        record = RunRecord.model_validate_json(
            record_path(run_dir, annotation.video_id).read_text(encoding="utf-8")
        )
        verdict = judge.call(
            JudgeRequest(prediction=record.report.description, reference=annotation.description)
        )
        aspects = AspectScores(
            subject=verdict.subject,
            scene=verdict.scene,
            course_of_events=verdict.course_of_events,
            impact=verdict.impact,
        )
        au = aggregate_au(aspects)
        metrics: MetricScores | None = None
        if annotation.category != NORMAL:
            predicted = [record.report.grounded] if record.report.grounded else []
            iou = interval_set_iou(predicted, annotation.grounding)
            metrics = jeaug(au, iou, annotation.duration_frames)
        qa_pairs = list(zip(record.qa_chosen, (item.answer_index for item in annotation.qa)))
        if len(qa_pairs) != len(annotation.qa):
            log.warning(
                "%s: %d recorded QA answers for %d questions",
                annotation.video_id,
                len(record.qa_chosen),
                len(annotation.qa),
            )
        qa_pairs_all.extend(qa_pairs)
        videos.append(
            VideoEval(
                video_id=annotation.video_id,
                category_true=annotation.category,
                category_pred=record.report.category,
                aspects=aspects,
                au=au,
                metrics=metrics,
                qa_correct=sum(1 for c, a in qa_pairs if c == a),
                qa_total=len(qa_pairs),
            )
        )
        wall_total += record.timings.wall_seconds
        frames_total += record.timings.duration_frames

    fps = frames_total / wall_total if wall_total > 0 else 0.0
    jeaug_values = [v.metrics.jeaug for v in videos if v.metrics is not None]
    jeaug_mean = _mean(jeaug_values)
    overall = OverallMetrics(
        au_mean=_mean([v.au for v in videos]),
        jeaug_mean=jeaug_mean,
        qa_accuracy=qa_accuracy(qa_pairs_all) if qa_pairs_all else None,
        fps=fps,
        acceptable=jeaug_mean is not None and jeaug_mean >= ACCEPTABLE_JEAUG and fps >= ACCEPTABLE_FPS,
    )
    per_category = []
    for label in ALL_LABELS:
        rows = [v for v in videos if v.category_true == label]
        qa_total = sum(v.qa_total for v in rows)
        per_category.append(
            CategoryRow(
                category=label,
                count=len(rows),
                au_mean=_mean([v.au for v in rows]),
                jeaug_mean=_mean([v.metrics.jeaug for v in rows if v.metrics is not None]),
                qa_accuracy=sum(v.qa_correct for v in rows) / qa_total if qa_total else None,
            )
        )
    table = SummaryTable(
        run_id=summary.run_id, overall=overall, per_category=per_category, videos=videos
    )
    (run_dir / EVAL_FILE).write_text(
        json.dumps(table.model_dump(mode="json"), sort_keys=True, indent=2), encoding="utf-8"
    )
    return table
