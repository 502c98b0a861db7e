"""Annotation schema, embedding/frames ingestion, and run persistence."""

from .annotations import QAItem, VideoAnnotation, load_annotations, write_annotations
from .embeddings import EmbeddingMatrix, load_embeddings, write_embeddings
from .frames import resolve_frames
from .results import (
    FailureRecord,
    RunArtifacts,
    RunRecord,
    RunSummary,
    StageTimings,
    list_run_records,
    load_run_record,
    load_summary,
    strip_timing,
    write_run_record,
    write_summary,
)

__all__ = [
    "QAItem",
    "VideoAnnotation",
    "load_annotations",
    "write_annotations",
    "EmbeddingMatrix",
    "load_embeddings",
    "write_embeddings",
    "resolve_frames",
    "RunRecord",
    "RunArtifacts",
    "RunSummary",
    "StageTimings",
    "FailureRecord",
    "write_run_record",
    "load_run_record",
    "list_run_records",
    "write_summary",
    "load_summary",
    "strip_timing",
]
