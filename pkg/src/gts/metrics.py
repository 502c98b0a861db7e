"""Closed-form joint metric, classical interval metrics, and stability statistics.

Everything in this module is a pure function of its arguments: no state, no
randomness, bitwise-reproducible outputs.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import DomainError, UndefinedMetricError

__all__ = [
    "Interval",
    "AspectScores",
    "MetricScores",
    "interval_iou",
    "interval_set_iou",
    "f_iou",
    "f_iou_max",
    "gamma",
    "jeaug",
    "aggregate_au",
    "qa_accuracy",
    "coefficient_of_variation",
    "extract_choice",
]

_LOG_SCALE = 0.63 / math.log(10.0)


class Interval(BaseModel):
    """Half-open frame interval ``[start, end)``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    start: int = Field(ge=0)
    end: int

    @model_validator(mode="after")
    def _check_order(self) -> "Interval":
        if self.end <= self.start:
            raise ValueError(f"interval end ({self.end}) must exceed start ({self.start})")
        return self

    def __len__(self) -> int:
        return self.end - self.start

    def __contains__(self, frame: int) -> bool:
        return self.start <= frame < self.end


class AspectScores(BaseModel):
    """Judged 1-10 scores on the four understanding aspects."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    subject: int = Field(ge=1, le=10)
    scene: int = Field(ge=1, le=10)
    course_of_events: int = Field(ge=1, le=10)
    impact: int = Field(ge=1, le=10)


class MetricScores(BaseModel):
    """All components of the joint understanding/grounding score."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    au_score: float
    iou: float
    f_iou: float
    gamma: float
    grounding_factor: float
    jeaug: float
    qa_accuracy: float | None = None


def interval_iou(a: Interval, b: Interval) -> float:
    """Intersection-over-union of two frame intervals; 0.0 when disjoint."""
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter <= 0:
        return 0.0
    union = len(a) + len(b) - inter
    return inter / union


def _merge(intervals: Iterable[Interval]) -> list[tuple[int, int]]:
    spans = sorted((iv.start, iv.end) for iv in intervals)
    merged: list[tuple[int, int]] = []
    for start, end in spans:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def interval_set_iou(predicted: Iterable[Interval], truth: Iterable[Interval]) -> float:
    """IoU between two interval sets, computed over the union of their frames.

    Either side may hold several disjoint or overlapping intervals; each side
    is first merged into a canonical frame set.
    """
    pred = _merge(predicted)
    true = _merge(truth)
    if not pred and not true:
        return 1.0
    inter = 0
    for ps, pe in pred:
        for ts, te in true:
            inter += max(0, min(pe, te) - max(ps, ts))
    total_p = sum(e - s for s, e in pred)
    total_t = sum(e - s for s, e in true)
    union = total_p + total_t - inter
    if union == 0:
        return 0.0
    return inter / union


def f_iou(iou: float) -> float:
    """Stepwise grounding score: log of the capped IoU decile, offset to 0.5.

    Constant on each decile ``[k/10, (k+1)/10)`` and on the plateau
    ``iou >= 0.7``; nondecreasing over ``[0, 1]``.
    """
    if not 0.0 <= iou <= 1.0:
        raise DomainError(f"iou must lie in [0, 1], got {iou}")
    k = min(math.floor(10.0 * iou), 7)
    return _LOG_SCALE * math.log(0.7 * k + 1.0) + 0.5


def f_iou_max() -> float:
    """Largest attainable grounding score (the plateau value)."""
    return f_iou(0.7)


def gamma(duration_frames: int) -> float:
    """Video length compensation factor in ``[1, 1.25)``, nondecreasing.

    A cubic saturation term gated by a logistic in the frame count rewards
    grounding in longer videos.
    """
    if duration_frames < 0:
        raise DomainError(f"duration_frames must be >= 0, got {duration_frames}")
    t = float(duration_frames)
    saturation = 1.0 - math.exp(-((t / 100.0) ** 3))
    gate = 1.0 / (1.0 + math.exp(-0.03 * (t - 100.0)))
    return 1.0 + 0.25 * saturation * gate


def jeaug(au_score: float, iou: float, duration_frames: int) -> MetricScores:
    """Joint score: understanding score scaled by a capped grounding factor.

    ``grounding_factor = min(gamma(T) * f_iou(iou), 1)`` and
    ``jeaug = grounding_factor * au_score`` exactly.
    """
    if not 1.0 <= au_score <= 10.0:
        raise DomainError(f"au_score must lie in [1, 10], got {au_score}")
    f = f_iou(iou)
    g = gamma(duration_frames)
    grounding_factor = min(g * f, 1.0)
    return MetricScores(
        au_score=au_score,
        iou=iou,
        f_iou=f,
        gamma=g,
        grounding_factor=grounding_factor,
        jeaug=grounding_factor * au_score,
    )


def aggregate_au(aspects: AspectScores) -> float:
    """Arithmetic mean of the four judged aspects."""
    return (aspects.subject + aspects.scene + aspects.course_of_events + aspects.impact) / 4.0


def qa_accuracy(answers: Sequence[tuple[int | None, int]]) -> float:
    """Fraction of ``(chosen_index, answer_index)`` pairs that match.

    ``chosen_index`` may be ``None`` for an unparseable reply; it never matches.
    """
    if not answers:
        raise UndefinedMetricError("qa_accuracy is undefined for an empty answer list")
    hits = sum(1 for chosen, answer in answers if chosen == answer)
    return hits / len(answers)


def coefficient_of_variation(per_subset_scores: Sequence[float]) -> float:
    """Population standard deviation over the mean, times 100."""
    if len(per_subset_scores) < 2:
        raise DomainError("coefficient_of_variation needs at least 2 entries")
    mean = sum(per_subset_scores) / len(per_subset_scores)
    if mean == 0.0:
        raise UndefinedMetricError("coefficient_of_variation is undefined for zero mean")
    var = sum((x - mean) ** 2 for x in per_subset_scores) / len(per_subset_scores)
    return math.sqrt(var) / mean * 100.0


_CHOICE_RE = re.compile(r"\b([A-Ea-e])\b")


def extract_choice(reply: str, n_options: int) -> int | None:
    """First standalone option letter (A-E) in a free-text reply, as an index.

    Letters beyond the available options are skipped; returns ``None`` when no
    usable letter appears (callers count that as an incorrect answer).
    """
    if not 1 <= n_options <= 5:
        raise DomainError(f"n_options must lie in [1, 5], got {n_options}")
    for match in _CHOICE_RE.finditer(reply):
        index = ord(match.group(1).upper()) - ord("A")
        if index < n_options:
            return index
    return None
