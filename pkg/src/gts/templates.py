"""Editable prompt-template assets for the question-asking roles."""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .errors import ConfigError


@dataclass(frozen=True)
class PromptTemplates:
    high_segment_question: str
    low_segment_question: str
    qa_question: str

    def high_question(self, anomaly_list: Sequence[str]) -> str:
        return self.high_segment_question.format(anomaly_list=", ".join(anomaly_list))

    def low_question(self) -> str:
        return self.low_segment_question

    def qa(self, question: str, options: Sequence[str]) -> str:
        lettered = "\n".join(
            f"{string.ascii_uppercase[i]}. {opt}" for i, opt in enumerate(options)
        )
        return self.qa_question.format(question=question, options=lettered)


def load_templates(path: str | Path | None = None) -> PromptTemplates:
    """Load templates from a JSON file, defaulting to the packaged asset."""
    if path is None:
        text = resources.files("gts").joinpath("assets/prompt_templates.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    try:
        return PromptTemplates(
            high_segment_question=data["high_segment_question"],
            low_segment_question=data["low_segment_question"],
            qa_question=data["qa_question"],
        )
    except KeyError as exc:
        raise ConfigError(f"prompt template file missing key {exc}") from exc


def load_default_phrase_bank() -> dict[str, list[str]]:
    text = resources.files("gts").joinpath("assets/phrase_bank.json").read_text("utf-8")
    return json.loads(text)
