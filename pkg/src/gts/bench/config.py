"""Benchmark configuration: dataset paths, backend bindings, pipeline knobs."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..curve import FusionConfig, PeakConfig, WindowConfig
from ..errors import UsageError
from ..gateway.client import BackendEndpoint
from ..gateway.protocol import ROLES

FRAME_ROOT_ENV = "GTS_FRAME_ROOT"

Role = Literal[
    "caption",
    "prompts",
    "embed_text",
    "embed_image",
    "embed_video",
    "vqa",
    "integrate",
    "vtg",
    "judge",
]


class EndpointConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base_url: str
    timeout_ms: int = Field(default=30_000, gt=0)
    max_retries: int = Field(default=2, ge=0)
    auth_token: str | None = None

    def to_endpoint(self, role: str) -> BackendEndpoint:
        return BackendEndpoint(
            role=role,
            base_url=self.base_url,
            timeout_ms=self.timeout_ms,
            max_retries=self.max_retries,
            auth_token=self.auth_token,
        )


class MockConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enabled: bool = False
    seed: int = 0
    rules_path: str | None = None
    embed_dim: int = Field(default=32, ge=2)


class DatasetConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    annotations: str
    frame_root: str | None = None
    embeddings_dir: str | None = None
    videos_root: str | None = None
    extractor_cmd: str | None = None

    def resolve_frame_root(self) -> str:
        """Configured frame root, else the GTS_FRAME_ROOT environment variable."""
        root = self.frame_root or os.environ.get(FRAME_ROOT_ENV)
        if not root:
            raise UsageError(
                f"no frame_root configured and {FRAME_ROOT_ENV} is unset"
            )
        return root


class PipelineKnobs(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(default=0.4, ge=0.0, le=1.0)
    sg_half_window: int = Field(default=4, ge=1)
    sg_poly_order: int = Field(default=2, ge=0)
    peak_min_distance: float | None = Field(default=None, gt=0)
    peak_magnitude_threshold: float | None = None
    top_k: int = Field(default=5, ge=1, le=7)
    window_beta: float = Field(default=0.05, gt=0.0, lt=1.0)
    n_frames: int = Field(default=8, ge=1)
    clip_window: int = Field(default=16, ge=1)
    clip_stride: int = Field(default=8, ge=1)

    def fusion(self) -> FusionConfig:
        return FusionConfig(
            alpha=self.alpha,
            sg_half_window=self.sg_half_window,
            sg_poly_order=self.sg_poly_order,
        )

    def peaks(self) -> PeakConfig:
        return PeakConfig(
            min_distance=self.peak_min_distance,
            magnitude_threshold=self.peak_magnitude_threshold,
            top_k=self.top_k,
        )

    def window(self) -> WindowConfig:
        return WindowConfig(beta=self.window_beta)


class AblationFlags(BaseModel):
    model_config = ConfigDict(extra="forbid")

    static_guidance: bool = True
    dynamic_guidance: bool = True
    integral_sampling: bool = True
    contextual_understanding: bool = True

    @model_validator(mode="after")
    def _at_least_one_branch(self) -> "AblationFlags":
        if not (self.static_guidance or self.dynamic_guidance):
            raise ValueError("at least one guidance branch must stay enabled")
        return self


class BenchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset: DatasetConfig
    backends: dict[Role, EndpointConfig] = {}
    pipeline: PipelineKnobs = PipelineKnobs()
    ablation: AblationFlags = AblationFlags()
    mock: MockConfig = MockConfig()
    workers: int = Field(default=1, ge=1)
    run_id: str | None = None
    runs_root: str = "runs"
    prompt_templates: str | None = None

    def endpoint_for(self, role: str) -> BackendEndpoint:
        if role not in ROLES:
            raise UsageError(f"unknown backend role {role!r}")
        if role not in self.backends:
            raise UsageError(f"no endpoint bound for role {role!r} (and mock mode is off)")
        return self.backends[role].to_endpoint(role)


def load_config(path: str | Path) -> BenchConfig:
    """Parse a JSON config file mirroring :class:`BenchConfig`."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        return BenchConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(loc) for loc in first["loc"]) or "<root>"
        raise UsageError(f"invalid config {path}: {where}: {first['msg']}") from exc


def config_fingerprint(config: BenchConfig) -> str:
    """Hash of every threshold and backend binding; stable across reruns.

    Parallelism and run naming are excluded: they cannot change results.
    """
    payload = config.model_dump(mode="json", exclude={"run_id", "workers", "runs_root"})
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]
