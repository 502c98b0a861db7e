"""Batch execution of the pipeline over an annotated dataset."""

from __future__ import annotations

import logging
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

from ..dataset.annotations import VideoAnnotation, load_annotations
from ..dataset.frames import resolve_frames
from ..dataset.results import (
    FailureRecord,
    RunArtifacts,
    RunRecord,
    RunSummary,
    StageTimings,
    write_run_record,
    write_summary,
)
from ..errors import GtsError, PipelineStageError, UsageError
from ..gateway.client import GatewayClient
from ..gateway.mock import MockBackend, load_rules
from ..glance import BackendEmbeddingSource, EmbeddingSource, PrecomputedEmbeddingSource
from ..scrutinize import (
    PipelineBackends,
    PipelineOutcome,
    PipelineSettings,
    answer_qa,
    run_pipeline,
)
from ..taxonomy import DEFAULT_TAXONOMY
from ..templates import load_default_phrase_bank, load_templates
from .config import BenchConfig, config_fingerprint

log = logging.getLogger(__name__)

# Set by a signal handler (see the CLI) to stop submitting new videos while
# letting in-flight ones finish. Batches started afterwards must clear it.
GLOBAL_STOP = threading.Event()


@dataclass
class RunOutcome:
    run_dir: Path
    summary: RunSummary
    exit_code: int


def _build_clients(config: BenchConfig) -> tuple[dict[str, GatewayClient], MockBackend | None]:
    if config.mock.enabled:
        rules = load_rules(config.mock.rules_path) if config.mock.rules_path else []
        mock = MockBackend(seed=config.mock.seed, rules=rules, embed_dim=config.mock.embed_dim)
        roles = ("caption", "prompts", "vqa", "integrate", "vtg", "embed_text", "embed_image", "embed_video")
        return {role: mock.client(role) for role in roles}, mock
    clients = {}
    for role in ("caption", "prompts", "vqa", "integrate", "vtg"):
        clients[role] = GatewayClient(config.endpoint_for(role))
    for role in ("embed_text", "embed_image", "embed_video"):
        if role in config.backends:
            clients[role] = GatewayClient(config.endpoint_for(role))
    return clients, None


def build_pipeline_backends(config: BenchConfig) -> tuple[PipelineBackends, MockBackend | None]:
    """Wire clients and the embedding source according to the config.

    Precomputed embedding files take priority; backend embed roles are the
    fallback and may be left unbound when every video has files on disk.
    """
    clients, mock = _build_clients(config)
    backend_source: EmbeddingSource | None = None
    if all(role in clients for role in ("embed_text", "embed_image", "embed_video")):
        backend_source = BackendEmbeddingSource(
            clients["embed_text"],
            clients["embed_image"],
            clients["embed_video"],
            clip_window=config.pipeline.clip_window,
            clip_stride=config.pipeline.clip_stride,
        )
    if config.dataset.embeddings_dir:
        source: EmbeddingSource = PrecomputedEmbeddingSource(
            config.dataset.embeddings_dir, fallback=backend_source
        )
    elif backend_source is not None:
        source = backend_source
    else:
        raise UsageError("no embedding source: bind embed_* endpoints or set dataset.embeddings_dir")
    backends = PipelineBackends(
        caption=clients["caption"],
        prompts=clients["prompts"],
        vqa=clients["vqa"],
        integrate=clients["integrate"],
        vtg=clients["vtg"],
        embeddings=source,
    )
    return backends, mock


def pipeline_settings(config: BenchConfig) -> PipelineSettings:
    return PipelineSettings(
        fusion=config.pipeline.fusion(),
        peaks=config.pipeline.peaks(),
        window=config.pipeline.window(),
        n_frames=config.pipeline.n_frames,
        use_static=config.ablation.static_guidance,
        use_dynamic=config.ablation.dynamic_guidance,
        integral_sampling=config.ablation.integral_sampling,
        contextual_understanding=config.ablation.contextual_understanding,
        taxonomy=DEFAULT_TAXONOMY,
        phrase_bank=load_default_phrase_bank(),
        templates=load_templates(config.prompt_templates),
    )


def _artifacts(outcome: PipelineOutcome) -> RunArtifacts:
    glance = outcome.glance
    return RunArtifacts(
        caption=outcome.caption,
        prompts_static=list(outcome.prompts.static),
        prompts_dynamic=list(outcome.prompts.dynamic),
        curve=glance.curve.values.tolist(),
        static_curve=glance.static_curve.values.tolist() if glance.static_curve else None,
        dynamic_curve=glance.dynamic_curve.values.tolist() if glance.dynamic_curve else None,
        peaks=list(glance.peaks),
        screened=list(glance.screened),
    )


def run_one_video(
    annotation: VideoAnnotation,
    config: BenchConfig,
    backends: PipelineBackends,
    settings: PipelineSettings,
    fingerprint: str,
) -> RunRecord:
    frame_refs = resolve_frames(
        annotation.video_id,
        config.dataset.resolve_frame_root(),
        expected_frames=annotation.duration_frames,
        extractor_cmd=config.dataset.extractor_cmd,
        video_path=(
            Path(config.dataset.videos_root) / f"{annotation.video_id}.mp4"
            if config.dataset.videos_root
            else None
        ),
    )
    started = time.perf_counter()
    outcome = run_pipeline(annotation.video_id, frame_refs, backends, settings)
    chosen = answer_qa(
        annotation.qa,
        outcome.glance.curve,
        frame_refs,
        backends.vqa,
        settings.templates,
        n_frames=settings.n_frames,
        mode=settings.sample_mode,
    )
    wall = time.perf_counter() - started
    return RunRecord(
        video_id=annotation.video_id,
        report=outcome.report,
        qa_chosen=chosen,
        timings=StageTimings(
            stages=dict(outcome.report.timing),
            wall_seconds=wall,
            duration_frames=annotation.duration_frames,
        ),
        config_fingerprint=fingerprint,
        artifacts=_artifacts(outcome),
    )


def run_batch(
    config: BenchConfig,
    *,
    stop_event: threading.Event | None = None,
) -> RunOutcome:
    """Process every annotated video; one record or failure entry per video.

    Returns exit code 0 on full success and 2 when any video failed; config
    invariant violations raise :class:`UsageError` before any work starts.
    """
    annotations = load_annotations(config.dataset.annotations)
    run_id = config.run_id or f"run-{uuid.uuid4().hex[:12]}"
    run_dir = Path(config.runs_root) / run_id
    if run_dir.exists():
        raise UsageError(f"run directory {run_dir} already exists")
    run_dir.mkdir(parents=True)
    fingerprint = config_fingerprint(config)
    backends, _mock = build_pipeline_backends(config)
    settings = pipeline_settings(config)
    stop = stop_event if stop_event is not None else GLOBAL_STOP

    completed: list[str] = []
    failures: list[FailureRecord] = []
    frames_total = 0
    wall_total = 0.0

    def process(annotation: VideoAnnotation) -> RunRecord:
        return run_one_video(annotation, config, backends, settings, fingerprint)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = {}
        for annotation in annotations:
            if stop.is_set():
                break
            futures[pool.submit(process, annotation)] = annotation
        for future in as_completed(futures):
            annotation = futures[future]
            try:
                record = future.result()
            except PipelineStageError as exc:
                log.error("video %s failed: %s", annotation.video_id, exc)
                failures.append(
                    FailureRecord(video_id=annotation.video_id, stage=exc.stage, error=str(exc))
                )
                continue
            except GtsError as exc:
                log.error("video %s failed: %s", annotation.video_id, exc)
                failures.append(
                    FailureRecord(video_id=annotation.video_id, stage="ingest", error=str(exc))
                )
                continue
            write_run_record(run_dir, record)
            completed.append(record.video_id)
            frames_total += record.timings.duration_frames
            wall_total += record.timings.wall_seconds

    skipped = [a.video_id for a in annotations if a.video_id not in set(completed)]
    for video_id in skipped:
        if not any(f.video_id == video_id for f in failures) and stop.is_set():
            failures.append(FailureRecord(video_id=video_id, stage="", error="stopped by signal"))
    summary = RunSummary(
        run_id=run_id,
        config_fingerprint=fingerprint,
        video_ids=[a.video_id for a in annotations],
        completed=sorted(completed),
        failures=sorted(failures, key=lambda f: f.video_id),
        duration_frames_total=frames_total,
        wall_seconds_total=wall_total,
        fps=frames_total / wall_total if wall_total > 0 else 0.0,
    )
    write_summary(run_dir, summary)
    return RunOutcome(run_dir=run_dir, summary=summary, exit_code=2 if summary.failures else 0)
