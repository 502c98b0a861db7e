"""Frame reference resolution: pre-extracted directories or a user extractor."""

from __future__ import annotations

import shlex
import subprocess
from pathlib import Path

from ..errors import ExtractionError, IngestionError


def resolve_frames(
    video_id: str,
    frame_root: str | Path,
    expected_frames: int | None = None,
    *,
    extractor_cmd: str | None = None,
    video_path: str | Path | None = None,
) -> list[str]:
    """Ordered frame references ``"<video_id>/<filename>"`` for one video.

    Frames live as zero-padded index filenames under ``frame_root/video_id``.
    When the directory is missing and an extractor template is configured,
    the template runs with ``{input}`` and ``{outdir}`` placeholders filled;
    the tool itself never depends on any specific media library.
    """
    root = Path(frame_root)
    directory = root / video_id
    if not directory.is_dir():
        if extractor_cmd is None:
            raise IngestionError(
                f"no frame directory {directory} and no extractor command configured"
            )
        if video_path is None:
            raise IngestionError(
                f"extractor configured but no source video path known for {video_id!r}"
            )
        directory.mkdir(parents=True, exist_ok=True)
        command = extractor_cmd.format(input=str(video_path), outdir=str(directory))
        result = subprocess.run(shlex.split(command), capture_output=True, text=True)
        if result.returncode != 0:
            raise ExtractionError(
                f"extractor exited {result.returncode} for {video_id!r}: {result.stderr.strip()}"
            )
    files = sorted(
        (p for p in directory.iterdir() if p.is_file() and p.stem.isdigit()),
        key=lambda p: int(p.stem),
    )
    if not files:
        raise IngestionError(f"{directory} holds no index-named frame files")
    if expected_frames is not None and len(files) != expected_frames:
        raise IngestionError(
            f"{directory} holds {len(files)} frames, annotation promises {expected_frames}"
        )
    return [f"{video_id}/{p.name}" for p in files]
