"""Phase 1: caption, prompt lists, branch embeddings, fused curve, segments."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .curve import (
    DYNAMIC_BRANCH,
    STATIC_BRANCH,
    FusionConfig,
    PeakConfig,
    SegmentSet,
    SimilarityCurve,
    WindowConfig,
    branch_curve,
    detect_peaks,
    fuse_and_smooth,
    partition_windows,
    resample_to_frames,
    screen_peaks,
)
from .dataset.embeddings import load_embeddings
from .errors import ConfigError, DomainError, IngestionError, PromptGenerationError, ProtocolError
from .gateway.client import GatewayClient
from .gateway.protocol import (
    CaptionRequest,
    EmbedImageRequest,
    EmbedTextRequest,
    EmbedVideoRequest,
    PromptsRequest,
)
from .taxonomy import AnomalyTaxonomy

PhraseBank = dict[str, list[str]]


def dedup_case_insensitive(items: Sequence[str]) -> tuple[str, ...]:
    """Drop later case-insensitive duplicates, preserving order."""
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        key = item.strip().lower()
        if key and key not in seen:
            seen.add(key)
            out.append(item.strip())
    return tuple(out)


@dataclass(frozen=True)
class PromptLists:
    """Static (subjects/scenes) and dynamic (actions/events) guidance phrases."""

    static: tuple[str, ...]
    dynamic: tuple[str, ...]

    def __post_init__(self):
        if not self.static or not self.dynamic:
            raise DomainError("prompt lists must both be nonempty")
        if any(not p.strip() for p in self.static + self.dynamic):
            raise DomainError("prompt phrases must be nonempty strings")


def validate_phrase_bank(bank: PhraseBank, taxonomy: AnomalyTaxonomy) -> PhraseBank:
    unknown = set(bank) - set(taxonomy.categories)
    if unknown:
        raise ConfigError(f"phrase bank keys outside the taxonomy: {sorted(unknown)}")
    return bank


def caption_video(video_id: str, frame_refs: Sequence[str], captioner: GatewayClient) -> str:
    """Whole-video caption via the caption backend; empty captions are refused."""
    response = captioner.call(CaptionRequest(video_id=video_id, frame_refs=list(frame_refs)))
    caption = response.caption.strip()
    if not caption:
        raise ProtocolError("caption backend returned an empty caption")
    return caption


def generate_prompt_lists(
    caption: str,
    taxonomy: AnomalyTaxonomy,
    phrase_bank: PhraseBank,
    generator: GatewayClient,
) -> PromptLists:
    """Ask the prompt backend for guidance phrase lists seeded by the caption.

    The returned lists may describe perfectly normal content; they exist to
    pick out the principal subjects and actions, not to assert an anomaly.
    """
    if not caption.strip():
        raise DomainError("caption must be nonempty")
    response = generator.call(
        PromptsRequest(
            caption=caption,
            anomaly_list=list(taxonomy.categories),
            phrase_bank=validate_phrase_bank(phrase_bank, taxonomy),
        )
    )
    static = dedup_case_insensitive(response.static)
    dynamic = dedup_case_insensitive(response.dynamic)
    if not static or not dynamic:
        raise PromptGenerationError(
            f"prompt generator returned empty lists (static={len(static)}, dynamic={len(dynamic)})",
            caption=caption,
        )
    return PromptLists(static=static, dynamic=dynamic)


class EmbeddingSource(Protocol):
    """Provider of the three embedding kinds used by the glance phase."""

    def text_vectors(self, video_id: str, texts: Sequence[str], kind: str) -> np.ndarray: ...

    def frame_vectors(self, video_id: str, frame_refs: Sequence[str]) -> np.ndarray: ...

    def clip_vectors(
        self, video_id: str, frame_refs: Sequence[str]
    ) -> tuple[list[int], np.ndarray]: ...


class BackendEmbeddingSource:
    """Embeddings fetched from the embed_text/embed_image/embed_video roles."""

    def __init__(
        self,
        embed_text: GatewayClient,
        embed_image: GatewayClient,
        embed_video: GatewayClient,
        *,
        clip_window: int = 16,
        clip_stride: int = 8,
    ):
        if clip_window < 1 or clip_stride < 1:
            raise ConfigError("clip window and stride must be positive")
        self._text = embed_text
        self._image = embed_image
        self._video = embed_video
        self.clip_window = clip_window
        self.clip_stride = clip_stride

    def text_vectors(self, video_id: str, texts: Sequence[str], kind: str) -> np.ndarray:
        response = self._text.call(EmbedTextRequest(texts=list(texts), kind=kind))
        return np.asarray(response.vectors, dtype=np.float64)

    def frame_vectors(self, video_id: str, frame_refs: Sequence[str]) -> np.ndarray:
        # One request covering every frame exactly once per video.
        response = self._image.call(EmbedImageRequest(frame_refs=list(frame_refs)))
        return np.asarray(response.vectors, dtype=np.float64)

    def clip_vectors(
        self, video_id: str, frame_refs: Sequence[str]
    ) -> tuple[list[int], np.ndarray]:
        response = self._video.call(
            EmbedVideoRequest(
                frame_refs=list(frame_refs), window=self.clip_window, stride=self.clip_stride
            )
        )
        return list(response.clip_starts), np.asarray(response.vectors, dtype=np.float64)


class PrecomputedEmbeddingSource:
    """Embeddings loaded from per-video files, skipping backend calls.

    Expected layout under ``root``: ``<video_id>.frames.gtsemb``,
    ``<video_id>.clips.gtsemb``, ``<video_id>.text-static.gtsemb`` and
    ``<video_id>.text-dynamic.gtsemb``. Missing pieces fall through to the
    optional backend source.
    """

    def __init__(self, root: str | Path, fallback: EmbeddingSource | None = None):
        self.root = Path(root)
        self.fallback = fallback

    def _path(self, video_id: str, piece: str) -> Path:
        return self.root / f"{video_id}.{piece}.gtsemb"

    def _fallback_or_raise(self, video_id: str, piece: str) -> EmbeddingSource:
        if self.fallback is None:
            raise IngestionError(
                f"no precomputed {piece} embeddings for {video_id!r} under {self.root} "
                "and no backend fallback configured"
            )
        return self.fallback

    def text_vectors(self, video_id: str, texts: Sequence[str], kind: str) -> np.ndarray:
        path = self._path(video_id, f"text-{kind}")
        if not path.is_file():
            return self._fallback_or_raise(video_id, f"text-{kind}").text_vectors(
                video_id, texts, kind
            )
        matrix = load_embeddings(path)
        return matrix.data.astype(np.float64)

    def frame_vectors(self, video_id: str, frame_refs: Sequence[str]) -> np.ndarray:
        path = self._path(video_id, "frames")
        if not path.is_file():
            return self._fallback_or_raise(video_id, "frames").frame_vectors(video_id, frame_refs)
        matrix = load_embeddings(path)
        if matrix.rows != len(frame_refs):
            raise IngestionError(
                f"{path} holds {matrix.rows} frame embeddings but the video has {len(frame_refs)} frames"
            )
        return matrix.data.astype(np.float64)

    def clip_vectors(
        self, video_id: str, frame_refs: Sequence[str]
    ) -> tuple[list[int], np.ndarray]:
        path = self._path(video_id, "clips")
        if not path.is_file():
            return self._fallback_or_raise(video_id, "clips").clip_vectors(video_id, frame_refs)
        matrix = load_embeddings(path)
        if matrix.kind != "video_clip" or not matrix.clip_stride:
            raise IngestionError(f"{path} does not hold video-clip embeddings")
        starts = [i * matrix.clip_stride for i in range(matrix.rows)]
        if starts and starts[-1] >= len(frame_refs):
            raise IngestionError(
                f"{path} covers clip starts up to {starts[-1]} but the video has "
                f"{len(frame_refs)} frames"
            )
        return starts, matrix.data.astype(np.float64)


@dataclass(frozen=True)
class GlanceResult:
    """Everything the scrutinize phase and diagnostics need from the glance."""

    segments: SegmentSet
    curve: SimilarityCurve
    static_curve: SimilarityCurve | None
    dynamic_curve: SimilarityCurve | None
    peaks: tuple[int, ...]
    screened: tuple[int, ...]


def build_segments(
    video_id: str,
    frame_refs: Sequence[str],
    prompts: PromptLists,
    source: EmbeddingSource,
    fusion: FusionConfig = FusionConfig(),
    peak_cfg: PeakConfig = PeakConfig(),
    window_cfg: WindowConfig = WindowConfig(),
    *,
    use_static: bool = True,
    use_dynamic: bool = True,
) -> GlanceResult:
    """Compose the branch curves, fuse, smooth, and partition the video.

    The two branches never share a vector space: each one pairs its own
    prompt embeddings with its own time axis, and the dynamic (per-clip)
    branch is step-resampled to frame resolution before fusion. Disabling a
    branch skips its embedding work entirely and collapses the fusion weight.
    """
    if not frame_refs:
        raise DomainError("video has no frames")
    if not (use_static or use_dynamic):
        raise ConfigError("at least one guidance branch must be enabled")
    total = len(frame_refs)

    static_curve = None
    if use_static:
        text = source.text_vectors(video_id, prompts.static, "static")
        frames = source.frame_vectors(video_id, frame_refs)
        static_curve = branch_curve(text, frames, kind=STATIC_BRANCH)

    dynamic_curve = None
    if use_dynamic:
        text = source.text_vectors(video_id, prompts.dynamic, "dynamic")
        starts, clips = source.clip_vectors(video_id, frame_refs)
        clip_curve = branch_curve(text, clips, kind=DYNAMIC_BRANCH)
        dynamic_curve = resample_to_frames(clip_curve, starts, total)

    if static_curve is not None and dynamic_curve is not None:
        effective = fusion
    elif static_curve is not None:
        effective = replace(fusion, alpha=1.0)
        dynamic_curve_for_fusion = SimilarityCurve(values=np.zeros(total), kind=DYNAMIC_BRANCH)
    else:
        effective = replace(fusion, alpha=0.0)
        static_curve_for_fusion = SimilarityCurve(values=np.zeros(total), kind=STATIC_BRANCH)

    fused = fuse_and_smooth(
        static_curve if static_curve is not None else static_curve_for_fusion,
        dynamic_curve if dynamic_curve is not None else dynamic_curve_for_fusion,
        effective,
    )
    peaks = detect_peaks(fused)
    screened = screen_peaks(peaks, fused, peak_cfg)
    segments = partition_windows(screened, total, window_cfg)
    return GlanceResult(
        segments=segments,
        curve=fused,
        static_curve=static_curve,
        dynamic_curve=dynamic_curve,
        peaks=tuple(peaks),
        screened=tuple(screened),
    )
