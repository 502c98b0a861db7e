"""Per-video annotation schema and JSON loading with invariant checks."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import AnnotationLoadError
from ..metrics import Interval
from ..taxonomy import ALL_LABELS, NORMAL


class QAItem(BaseModel):
    """One multiple-choice question with 2-5 options."""

    model_config = ConfigDict(extra="forbid")

    question: str = Field(min_length=1)
    options: list[str] = Field(min_length=2, max_length=5)
    answer_index: int = Field(ge=0)

    @model_validator(mode="after")
    def _answer_in_range(self) -> "QAItem":
        if self.answer_index >= len(self.options):
            raise ValueError(
                f"answer_index {self.answer_index} out of range for {len(self.options)} options"
            )
        if any(not opt.strip() for opt in self.options):
            raise ValueError("options must be nonempty strings")
        return self


class VideoAnnotation(BaseModel):
    """Ground truth for one video: category, grounding, description, QA."""

    model_config = ConfigDict(extra="forbid")

    video_id: str = Field(min_length=1)
    duration_frames: int = Field(ge=1)
    fps: float = Field(gt=0)
    category: str
    grounding: list[Interval] = []
    description: str = Field(min_length=1)
    qa: list[QAItem] = Field(min_length=2, max_length=5)

    @model_validator(mode="after")
    def _invariants(self) -> "VideoAnnotation":
        if self.category not in ALL_LABELS:
            raise ValueError(f"category {self.category!r} not in the taxonomy")
        if (self.category == NORMAL) != (len(self.grounding) == 0):
            raise ValueError(
                "category 'Normal' requires empty grounding and vice versa "
                f"(category={self.category!r}, grounding={len(self.grounding)} intervals)"
            )
        for interval in self.grounding:
            if interval.end > self.duration_frames:
                raise ValueError(
                    f"grounding interval [{interval.start}, {interval.end}) exceeds "
                    f"duration_frames={self.duration_frames}"
                )
        return self


def load_annotations(path: str | Path) -> list[VideoAnnotation]:
    """Parse an annotation split (JSON array); order-preserving and idempotent.

    Any invariant violation is reported with the offending record's index,
    video id, and field path.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise AnnotationLoadError(f"cannot read annotations from {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise AnnotationLoadError(f"{path} must hold a JSON array of records")
    out: list[VideoAnnotation] = []
    for index, record in enumerate(raw):
        video_id = record.get("video_id", "?") if isinstance(record, dict) else "?"
        try:
            out.append(VideoAnnotation.model_validate(record))
        except ValidationError as exc:
            fields = ", ".join(
                ".".join(str(loc) for loc in err["loc"]) or "<record>" for err in exc.errors()
            )
            first = exc.errors()[0]["msg"]
            raise AnnotationLoadError(
                f"record {index} (video_id={video_id!r}) field(s) [{fields}]: {first}"
            ) from exc
    return out


def write_annotations(path: str | Path, annotations: Sequence[VideoAnnotation]) -> None:
    payload = [a.model_dump(mode="json") for a in annotations]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
