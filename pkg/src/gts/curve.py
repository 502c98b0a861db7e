"""Numeric core of the glance phase.

Branch similarity curves, fusion + Savitzky-Golay smoothing, local-extrema
detection and screening, peak-centered window partitioning, and integral
(inverse-CDF) frame sampling. All functions are pure and operate on
immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import savgol_filter

from .errors import ConfigError, DomainError, ShapeError
from .metrics import Interval

__all__ = [
    "SimilarityCurve",
    "FusionConfig",
    "PeakConfig",
    "WindowConfig",
    "SegmentSet",
    "softmax",
    "branch_curve",
    "resample_to_frames",
    "fuse_and_smooth",
    "detect_peaks",
    "screen_peaks",
    "partition_windows",
    "uniform_sample_frames",
    "integral_quantile_frames",
    "integral_sample",
]

STATIC_BRANCH = "static_branch"
DYNAMIC_BRANCH = "dynamic_branch"
FUSED = "fused"
_KINDS = (STATIC_BRANCH, DYNAMIC_BRANCH, FUSED)


@dataclass(frozen=True)
class SimilarityCurve:
    """Per-timestep anomaly-relevance scores.

    Branch curves are softmax-normalized (nonnegative, sum 1); fused curves
    are smoothed mixtures and may dip below zero near boundaries.
    """

    values: np.ndarray
    kind: str = FUSED

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ShapeError(f"curve must be a nonempty 1-D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("curve values must be finite")
        if self.kind not in _KINDS:
            raise DomainError(f"unknown curve kind {self.kind!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def assert_normalized(self, tol: float = 1e-9) -> None:
        """Check the branch-curve contract: nonnegative values summing to 1."""
        if np.any(self.values < 0):
            raise DomainError("branch curve has negative values")
        if abs(float(self.values.sum()) - 1.0) > tol:
            raise DomainError(f"branch curve sums to {self.values.sum()}, expected 1")


@dataclass(frozen=True)
class FusionConfig:
    """Mixing weight and Savitzky-Golay smoothing parameters."""

    alpha: float = 0.4
    sg_half_window: int = 4
    sg_poly_order: int = 2

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.sg_half_window < 1:
            raise ConfigError(f"sg_half_window must be >= 1, got {self.sg_half_window}")
        if not 0 <= self.sg_poly_order < 2 * self.sg_half_window + 1:
            raise ConfigError(
                f"sg_poly_order must lie in [0, {2 * self.sg_half_window}], got {self.sg_poly_order}"
            )


MAX_TOP_K = 7


@dataclass(frozen=True)
class PeakConfig:
    """Screening thresholds for detected peaks.

    ``min_distance=None`` resolves to ``T / 12`` at screening time;
    ``magnitude_threshold=None`` selects the mean-of-peaks policy.
    """

    min_distance: float | None = None
    magnitude_threshold: float | None = None
    top_k: int = 5

    def __post_init__(self):
        if self.min_distance is not None and self.min_distance <= 0:
            raise ConfigError(f"min_distance must be positive, got {self.min_distance}")
        if not 1 <= self.top_k <= MAX_TOP_K:
            raise ConfigError(f"top_k must lie in [1, {MAX_TOP_K}], got {self.top_k}")


@dataclass(frozen=True)
class WindowConfig:
    """Half-window size around each peak, as a fraction of the frame count."""

    beta: float = 1.0 / 20.0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")


@dataclass(frozen=True)
class SegmentSet:
    """High/low anomaly-probability segments partitioning ``[0, T)``."""

    high: tuple[Interval, ...]
    low: tuple[Interval, ...]
    peaks: tuple[int, ...] = field(default=())

    @property
    def ordered(self) -> list[tuple[Interval, str]]:
        """All segments in temporal order, tagged ``"high"`` or ``"low"``."""
        tagged = [(seg, "high") for seg in self.high] + [(seg, "low") for seg in self.low]
        return sorted(tagged, key=lambda pair: pair[0].start)


def softmax(raw: np.ndarray) -> np.ndarray:
    """Softmax with max-subtraction, exactly invariant under exact shifts."""
    raw = np.asarray(raw, dtype=np.float64)
    shifted = raw - raw.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def branch_curve(
    text_vectors: Sequence[Sequence[float]] | np.ndarray,
    time_vectors: Sequence[Sequence[float]] | np.ndarray,
    kind: str = STATIC_BRANCH,
) -> SimilarityCurve:
    """Softmax over time of the mean cosine similarity to the prompt vectors.

    Both vector sets must be unit-normalized and share one dimension; the
    time axis may be frames (static branch) or clips (dynamic branch).
    """
    prompts = np.asarray(text_vectors, dtype=np.float64)
    times = np.asarray(time_vectors, dtype=np.float64)
    if prompts.ndim != 2 or prompts.shape[0] < 1:
        raise DomainError("need at least one prompt vector")
    if times.ndim != 2 or times.shape[0] < 1:
        raise DomainError("need at least one time-step vector")
    if prompts.shape[1] != times.shape[1]:
        raise ShapeError(
            f"prompt dim {prompts.shape[1]} != time-step dim {times.shape[1]}"
        )
    means = (times @ prompts.T).mean(axis=1)
    return SimilarityCurve(values=softmax(means), kind=kind)


def resample_to_frames(
    clip_curve: SimilarityCurve, clip_starts: Sequence[int], total_frames: int
) -> SimilarityCurve:
    """Expand a per-clip curve to frame resolution by step interpolation.

    Frame ``t`` takes the value of the clip whose start is the largest one
    ``<= t``; the result is renormalized to sum 1 so both branches fuse on
    the same scale.
    """
    starts = np.asarray(clip_starts, dtype=np.int64)
    if starts.size != len(clip_curve):
        raise ShapeError(f"{starts.size} clip starts for {len(clip_curve)} clip values")
    if starts.size == 0 or starts[0] != 0 or np.any(np.diff(starts) <= 0):
        raise DomainError("clip_starts must be strictly increasing and begin at 0")
    if total_frames < 1 or starts[-1] >= total_frames:
        raise DomainError("clip_starts must lie within [0, total_frames)")
    idx = np.searchsorted(starts, np.arange(total_frames), side="right") - 1
    values = clip_curve.values[idx]
    total = float(values.sum())
    if total <= 0:
        raise DomainError("cannot renormalize a zero-mass clip curve")
    return SimilarityCurve(values=values / total, kind=clip_curve.kind)


def fuse_and_smooth(
    s_static: SimilarityCurve, s_dynamic: SimilarityCurve, cfg: FusionConfig
) -> SimilarityCurve:
    """Alpha-blend the branch curves and smooth with a Savitzky-Golay filter.

    The filter performs a least-squares polynomial fit over a window of
    ``2h + 1`` frames with mirror padding at the boundaries.
    """
    if len(s_static) != len(s_dynamic):
        raise ShapeError(f"branch lengths differ: {len(s_static)} vs {len(s_dynamic)}")
    window = 2 * cfg.sg_half_window + 1
    if window > len(s_static):
        raise ConfigError(f"smoothing window {window} exceeds curve length {len(s_static)}")
    fused = cfg.alpha * s_static.values + (1.0 - cfg.alpha) * s_dynamic.values
    smoothed = savgol_filter(fused, window, cfg.sg_poly_order, mode="mirror")
    return SimilarityCurve(values=smoothed, kind=FUSED)


def detect_peaks(curve: SimilarityCurve) -> list[int]:
    """Local maxima: ``S(t-1) < S(t) >= S(t+1)`` with out-of-range neighbors
    at ``-inf``; a plateau reports its first index only."""
    v = curve.values
    left = np.concatenate(([-np.inf], v[:-1]))
    right = np.concatenate((v[1:], [-np.inf]))
    return np.flatnonzero((left < v) & (v >= right)).tolist()


def screen_peaks(
    peaks: Sequence[int], curve: SimilarityCurve, cfg: PeakConfig
) -> list[int]:
    """Threshold, distance-prune, and cap the detected peaks.

    Peaks below the magnitude threshold (mean of all peak values under the
    default policy) are dropped; remaining conflicts within ``min_distance``
    are resolved greedily in descending score order with earlier indices
    winning ties; the ``top_k`` highest-scoring survivors are returned in
    frame order.
    """
    peaks = list(peaks)
    if not peaks:
        return []
    if any(not 0 <= p < len(curve) for p in peaks):
        raise DomainError("peak index out of range")
    v = curve.values
    theta = cfg.min_distance if cfg.min_distance is not None else len(curve) / 12.0
    tau = (
        cfg.magnitude_threshold
        if cfg.magnitude_threshold is not None
        else float(np.mean(v[peaks]))
    )
    candidates = [p for p in peaks if v[p] >= tau]
    kept: list[int] = []
    for p in sorted(candidates, key=lambda p: (-v[p], p)):
        if all(abs(p - q) > theta for q in kept):
            kept.append(p)
    top = sorted(kept, key=lambda p: (-v[p], p))[: min(cfg.top_k, MAX_TOP_K)]
    return sorted(top)


def partition_windows(
    selected: Sequence[int], total_frames: int, cfg: WindowConfig
) -> SegmentSet:
    """Clip a half-open window around each peak and split ``[0, T)``.

    The half-window is ``floor(beta * T)`` frames (at least the peak frame
    itself); overlapping or adjacent windows merge. With no selected peaks
    the whole video becomes a single high segment so the scrutinize phase
    always has input.
    """
    if total_frames < 1:
        raise DomainError(f"total_frames must be >= 1, got {total_frames}")
    selected = sorted(selected)
    if any(not 0 <= p < total_frames for p in selected):
        raise DomainError("selected peak outside [0, total_frames)")
    if not selected:
        high = [Interval(start=0, end=total_frames)]
    else:
        half = math.floor(cfg.beta * total_frames)
        spans: list[tuple[int, int]] = []
        for p in selected:
            start = max(0, p - half)
            end = min(total_frames, max(p + 1, p + half))
            if spans and start <= spans[-1][1]:
                spans[-1] = (spans[-1][0], max(spans[-1][1], end))
            else:
                spans.append((start, end))
        high = [Interval(start=s, end=e) for s, e in spans]
    low: list[Interval] = []
    cursor = 0
    for seg in high:
        if seg.start > cursor:
            low.append(Interval(start=cursor, end=seg.start))
        cursor = seg.end
    if cursor < total_frames:
        low.append(Interval(start=cursor, end=total_frames))
    return SegmentSet(high=tuple(high), low=tuple(low), peaks=tuple(selected))


def uniform_sample_frames(segment: Interval, n: int) -> list[int]:
    """Midpoints of ``n`` equal-width bins over the segment (may repeat)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    length = len(segment)
    return [segment.start + int((k + 0.5) * length / n) for k in range(n)]


def _segment_values(curve: SimilarityCurve, segment: Interval) -> np.ndarray:
    if segment.start < 0 or segment.end > len(curve):
        raise DomainError(f"segment {segment} outside curve of length {len(curve)}")
    # Fused curves may dip below zero near window boundaries; negative mass
    # is meaningless for sampling, so it is floored at zero here.
    return np.clip(curve.values[segment.start : segment.end], 0.0, None)


# Exact quantile ties must pick the earlier frame; cumulative summation
# noise (~1e-16 relative) would otherwise flip them to the next one.
_QUANTILE_TOLERANCE = 1e-12


def integral_quantile_frames(curve: SimilarityCurve, segment: Interval, n: int) -> list[int]:
    """Raw quantile frames: smallest ``t`` whose normalized cumulative mass
    reaches ``i/n`` for ``i = 1..n``. Repeats under degenerate mass; falls
    back to uniform midpoints when the segment carries no mass."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    v = _segment_values(curve, segment)
    cum = np.cumsum(v)
    total = cum[-1]
    if total <= 0.0:
        return uniform_sample_frames(segment, n)
    normalized = cum / total
    targets = np.arange(1, n + 1) / n - _QUANTILE_TOLERANCE
    idx = np.searchsorted(normalized, targets, side="left")
    return (segment.start + idx).tolist()


def integral_sample(curve: SimilarityCurve, segment: Interval, n: int) -> list[int]:
    """Deduplicated quantile frames, padded back toward ``n`` distinct frames.

    Padding first reuses uniform midpoints, then any remaining in-segment
    frames in order; the result has ``min(n, len(segment))`` sorted frames.
    """
    raw = integral_quantile_frames(curve, segment, n)
    chosen: list[int] = []
    seen: set[int] = set()
    for frame in raw:
        if frame not in seen:
            seen.add(frame)
            chosen.append(frame)
    target = min(n, len(segment))
    if len(chosen) < target:
        fillers = uniform_sample_frames(segment, target) + list(range(segment.start, segment.end))
        for frame in fillers:
            if len(chosen) >= target:
                break
            if frame not in seen:
                seen.add(frame)
                chosen.append(frame)
    return sorted(chosen)
