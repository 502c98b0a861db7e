"""Deterministic content-based feature extractors for the builtin models.

Text embeds via signed hashed character trigrams; images via a 16x16
luminance grid (offset so no frame maps to the zero vector); video clips
mean-pool their frame features. All outputs are L2-normalized, identical
inputs map to identical vectors, and everything is pure CPU.
"""

from __future__ import annotations

import hashlib
import re
import statistics
import threading
from pathlib import Path

import numpy as np
from PIL import Image

_WORD_RE = re.compile(r"[a-z0-9]+")


def _normalize(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        out = np.zeros_like(vector)
        out[0] = 1.0
        return out
    return vector / norm


class TextFeaturizer:
    """Signed hashed character trigrams over a lowercase text."""

    def __init__(self, dim: int):
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=np.float64)
        padded = f"  {text.lower().strip()}  "
        for i in range(len(padded) - 2):
            gram = padded[i : i + 3].encode("utf-8")
            digest = hashlib.md5(gram).digest()
            index = int.from_bytes(digest[:4], "little") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vector[index] += sign
        return _normalize(vector)

    def embed_many(self, texts: list[str]) -> np.ndarray:
        return np.stack([self.embed(t) for t in texts])


class ImageFeaturizer:
    """Luminance-grid features with a brightness offset, cached per path."""

    GRID = 16

    def __init__(self, dim: int):
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def _raw(self, path: Path) -> np.ndarray:
        with Image.open(path) as img:
            luma = np.asarray(
                img.convert("L").resize((self.GRID, self.GRID), Image.BILINEAR),
                dtype=np.float64,
            )
        flat = luma.reshape(-1) / 255.0 + 1.0  # offset: all-black stays nonzero
        if len(flat) >= self.dim:
            return flat[: self.dim]
        reps = -(-self.dim // len(flat))
        return np.tile(flat, reps)[: self.dim]

    def embed(self, path: Path) -> np.ndarray:
        key = str(path)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        vector = _normalize(self._raw(path))
        with self._lock:
            self._cache[key] = vector
        return vector

    def mean_luminance(self, path: Path) -> float:
        with Image.open(path) as img:
            return float(np.asarray(img.convert("L"), dtype=np.float64).mean())


def pool_clip(frame_vectors: np.ndarray) -> np.ndarray:
    """Mean-pooled clip embedding over its member frame features."""
    return _normalize(frame_vectors.mean(axis=0))


def locate_salient_span(luminances: list[float]) -> tuple[int, int]:
    """Frames whose brightness departs most from the video's median.

    Returns the half-open span from the first to the last frame whose
    absolute deviation exceeds mean + std of all deviations; falls back to
    the full span when nothing stands out.
    """
    total = len(luminances)
    if total == 0:
        return 0, 0
    median = statistics.median(luminances)
    deviations = [abs(v - median) for v in luminances]
    mean_dev = sum(deviations) / total
    std_dev = (sum((d - mean_dev) ** 2 for d in deviations) / total) ** 0.5
    threshold = mean_dev + std_dev
    marked = [t for t, d in enumerate(deviations) if d > threshold]
    if not marked:
        return 0, total
    return marked[0], marked[-1] + 1


def keywords(text: str, limit: int = 3) -> list[str]:
    """Longest distinct words of a text, a crude subject extractor."""
    words = sorted(set(_WORD_RE.findall(text.lower())), key=lambda w: (-len(w), w))
    return words[:limit] or ["the scene"]


def overlap_score(prediction: str, reference: str) -> int:
    """Word-overlap similarity mapped onto the 1-10 judging scale."""
    if prediction == reference:
        return 10
    pred = set(_WORD_RE.findall(prediction.lower()))
    ref = set(_WORD_RE.findall(reference.lower()))
    union = pred | ref
    jaccard = len(pred & ref) / len(union) if union else 0.0
    return max(1, min(10, 1 + round(9 * jaccard)))
