"""Pipeline output models shared by the orchestrators and run persistence."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .metrics import Interval
from .taxonomy import ALL_LABELS


class SegmentReport(BaseModel):
    """Model output for one high/low segment plus the frames it saw."""

    model_config = ConfigDict(extra="forbid")

    segment: Interval
    probability_class: Literal["high", "low"]
    sampled_frames: list[int] = Field(min_length=1)
    text: str
    context_from_previous: str | None = None

    @model_validator(mode="after")
    def _frames_inside_segment(self) -> "SegmentReport":
        for frame in self.sampled_frames:
            if frame not in self.segment:
                raise ValueError(
                    f"sampled frame {frame} outside segment "
                    f"[{self.segment.start}, {self.segment.end})"
                )
        return self


class AnomalyReport(BaseModel):
    """Integrated description, predicted category, and grounded interval."""

    model_config = ConfigDict(extra="forbid")

    description: str
    category: str
    grounded: Interval | None = None
    per_segment: list[SegmentReport] = []
    timing: dict[str, float] = {}

    @model_validator(mode="after")
    def _category_known(self) -> "AnomalyReport":
        if self.category not in ALL_LABELS:
            raise ValueError(f"category {self.category!r} not in the taxonomy")
        return self
