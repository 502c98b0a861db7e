"""Binary embedding file format: magic, JSON header line, little-endian f32.

The format is language-neutral, seekable, and bit-exact: ``GTSEMB1\\n``, one
UTF-8 JSON header line ``{"dtype": "f32", "rows": R, "dim": D, "kind": ...}``
(plus ``window``/``stride`` for video clips), then ``R * D`` row-major
little-endian 32-bit floats.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import EmbeddingFormatError

log = logging.getLogger(__name__)

MAGIC = b"GTSEMB1\n"
UNIT_TOLERANCE = 1e-5
_KINDS = ("text", "image", "video_clip")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """L2-normalized embedding rows plus their provenance header."""

    data: np.ndarray
    kind: str
    clip_window: int | None = None
    clip_stride: int | None = None

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise EmbeddingFormatError(f"embedding matrix must be 2-D and nonempty, got {data.shape}")
        if self.kind not in _KINDS:
            raise EmbeddingFormatError(f"unknown embedding kind {self.kind!r}")
        if self.kind == "video_clip":
            if not self.clip_window or not self.clip_stride:
                raise EmbeddingFormatError("video_clip embeddings need clip_window and clip_stride")
        elif self.clip_window or self.clip_stride:
            raise EmbeddingFormatError(f"{self.kind} embeddings must not carry clip parameters")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])


def write_embeddings(path: str | Path, matrix: EmbeddingMatrix) -> None:
    header: dict = {
        "dtype": "f32",
        "rows": matrix.rows,
        "dim": matrix.dim,
        "kind": matrix.kind,
    }
    if matrix.kind == "video_clip":
        header["window"] = matrix.clip_window
        header["stride"] = matrix.clip_stride
    blob = (
        MAGIC
        + json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
        + b"\n"
        + matrix.data.astype("<f4").tobytes()
    )
    Path(path).write_bytes(blob)


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read and validate an embedding file.

    Rows whose norm strays beyond ``1e-5`` are renormalized with a warning;
    an exactly zero row cannot be repaired and is a format error.
    """
    path = Path(path)
    blob = path.read_bytes()
    if not blob.startswith(MAGIC):
        raise EmbeddingFormatError(f"{path}: bad magic, not an embedding file")
    newline = blob.find(b"\n", len(MAGIC))
    if newline < 0:
        raise EmbeddingFormatError(f"{path}: missing header line")
    try:
        header = json.loads(blob[len(MAGIC) : newline].decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise EmbeddingFormatError(f"{path}: unparseable header: {exc}") from exc
    if header.get("dtype") != "f32":
        raise EmbeddingFormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    try:
        rows, dim, kind = int(header["rows"]), int(header["dim"]), header["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise EmbeddingFormatError(f"{path}: incomplete header: {exc}") from exc
    payload = blob[newline + 1 :]
    expected = rows * dim * 4
    if len(payload) != expected:
        raise EmbeddingFormatError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, dim)
    norms = np.linalg.norm(data.astype(np.float64), axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise EmbeddingFormatError(f"{path}: row {bad} is all zeros and cannot be normalized")
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > UNIT_TOLERANCE:
        log.warning("%s: renormalizing rows (worst norm deviation %.3e)", path, drift)
        data = (data / norms[:, None]).astype(np.float32)
    return EmbeddingMatrix(
        data=data,
        kind=kind,
        clip_window=header.get("window"),
        clip_stride=header.get("stride"),
    )
