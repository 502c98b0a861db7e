"""Aligned plain-text rendering of summaries and ablation comparisons."""

from __future__ import annotations

from .ablate import AblationResult
from .evaluate import SummaryTable


def _fmt(value: float | None, digits: int = 2, width: int = 8) -> str:
    if value is None:
        return "-".rjust(width)
    return f"{value:.{digits}f}".rjust(width)


def render_summary(table: SummaryTable) -> str:
    """Overall A.U/JeAUG/QA/FPS row plus the per-category breakdown."""
    lines = [
        f"run: {table.run_id}",
        "",
        f"{'':14}{'A.U':>8}{'JeAUG':>8}{'QA':>8}{'FPS':>10}{'OK':>4}",
        (
            f"{'overall':14}"
            f"{_fmt(table.overall.au_mean)}"
            f"{_fmt(table.overall.jeaug_mean)}"
            f"{_fmt(table.overall.qa_accuracy)}"
            f"{_fmt(table.overall.fps, width=10)}"
            + ("  ✓" if table.overall.acceptable else "  ✗")
        ),
        "",
        f"{'category':20}{'n':>4}{'A.U':>8}{'JeAUG':>8}{'QA':>8}",
    ]
    for row in table.per_category:
        lines.append(
            f"{row.category:20}{row.count:>4}"
            f"{_fmt(row.au_mean)}{_fmt(row.jeaug_mean)}{_fmt(row.qa_accuracy)}"
        )
    lines.append("")
    lines.append(f"{'video':14}{'true':>20}{'pred':>20}{'A.U':>8}{'JeAUG':>8}{'QA':>6}")
    for video in table.videos:
        jeaug_value = video.metrics.jeaug if video.metrics else None
        lines.append(
            f"{video.video_id:14}{video.category_true:>20}{video.category_pred:>20}"
            f"{_fmt(video.au)}{_fmt(jeaug_value)}"
            f"{f'{video.qa_correct}/{video.qa_total}':>6}"
        )
    return "\n".join(lines)


def render_ablation(result: AblationResult) -> str:
    lines = [
        f"{'variant':30}{'A.U':>8}{'JeAUG':>8}{'QA':>8}{'FPS':>10}"
        f"{'dA.U':>8}{'dJeAUG':>8}{'dQA':>8}",
    ]
    for row in result.rows:
        lines.append(
            f"{row.name:30}"
            f"{_fmt(row.au_mean)}{_fmt(row.jeaug_mean)}{_fmt(row.qa_accuracy)}"
            f"{_fmt(row.fps, width=10)}"
            f"{_fmt(row.delta_au, 4)}{_fmt(row.delta_jeaug, 4)}{_fmt(row.delta_qa, 4)}"
        )
    return "\n".join(lines)


def render_validation(count: int, errors: list[str]) -> str:
    if not errors:
        return f"{count} annotation record(s) valid"
    lines = [f"{len(errors)} invalid record(s):"] + [f"  {e}" for e in errors]
    return "\n".join(lines)
