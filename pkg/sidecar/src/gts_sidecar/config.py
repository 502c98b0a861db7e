"""Sidecar configuration."""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SidecarConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    frame_root: str
    host: str = "127.0.0.1"
    port: int = Field(default=8750, ge=1, le=65535)
    embed_dim: int = Field(default=256, ge=8)
    max_batch: int = Field(default=64, ge=1)
    # Opaque model identifiers per role; "builtin" selects the deterministic
    # content-based featurizers. Anything else must name a loadable model
    # (e.g. a sentence-transformers id) in deployments that have weights.
    models: dict[str, str] = {}

    @field_validator("frame_root")
    @classmethod
    def _root_exists(cls, value: str) -> str:
        path = Path(value)
        if not path.is_dir():
            raise ValueError(f"frame_root {value!r} is not a readable directory")
        return str(path.resolve())


def load_config(path: str | Path) -> SidecarConfig:
    return SidecarConfig.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
