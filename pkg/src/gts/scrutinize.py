"""Phase 2: per-segment sampling and VQA, report integration, grounding, QA."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

from .curve import (
    FusionConfig,
    PeakConfig,
    SimilarityCurve,
    SegmentSet,
    WindowConfig,
    integral_sample,
    uniform_sample_frames,
)
from .errors import BackendError, CategoryError, DomainError, PipelineStageError
from .gateway.client import GatewayClient
from .gateway.protocol import IntegrateRequest, VqaRequest, VtgRequest
from .glance import (
    EmbeddingSource,
    GlanceResult,
    PhraseBank,
    PromptLists,
    build_segments,
    caption_video,
    generate_prompt_lists,
)
from .metrics import Interval, extract_choice
from .reports import AnomalyReport, SegmentReport
from .taxonomy import NORMAL, AnomalyTaxonomy, DEFAULT_TAXONOMY
from .templates import PromptTemplates, load_templates

log = logging.getLogger(__name__)

SampleMode = Literal["integral", "uniform"]


def sample_segment(
    curve: SimilarityCurve, segment: Interval, n: int, mode: SampleMode = "integral"
) -> list[int]:
    """Pick up to ``n`` distinct frames from a segment.

    Integral mode places frames where the normalized cumulative curve mass
    crosses equal quantiles; uniform mode takes equal-bin midpoints. Both
    deduplicate and return at most ``min(n, len(segment))`` sorted frames.
    """
    if mode == "integral":
        return integral_sample(curve, segment, n)
    if mode == "uniform":
        raw = uniform_sample_frames(segment, n)
        unique = sorted(set(raw))
        target = min(n, len(segment))
        if len(unique) < target:
            for frame in range(segment.start, segment.end):
                if frame not in unique:
                    unique.append(frame)
                    if len(unique) >= target:
                        break
            unique.sort()
        return unique
    raise DomainError(f"unknown sampling mode {mode!r}")


def describe_segments(
    segments: SegmentSet,
    curve: SimilarityCurve,
    vqa: GatewayClient,
    frame_refs: Sequence[str],
    anomaly_list: Sequence[str],
    templates: PromptTemplates,
    *,
    n_frames: int = 8,
    mode: SampleMode = "integral",
    with_context: bool = True,
) -> list[SegmentReport]:
    """One VQA exchange per segment, in temporal order.

    High segments get the anomaly question (taxonomy attached), low segments
    the caption-plus-clues question. With context chaining on, every
    non-initial request carries the previous segment's response verbatim;
    chaining is exactly one step deep.
    """
    ordered = segments.ordered
    if not ordered:
        raise DomainError("segment set is empty")
    reports: list[SegmentReport] = []
    previous_text: str | None = None
    for segment, probability_class in ordered:
        frames = sample_segment(curve, segment, n_frames, mode)
        question = (
            templates.high_question(anomaly_list)
            if probability_class == "high"
            else templates.low_question()
        )
        context = previous_text if (with_context and previous_text is not None) else ""
        try:
            answer = vqa.call(
                VqaRequest(
                    frame_refs=[frame_refs[f] for f in frames],
                    question=question,
                    context=context,
                )
            ).answer
        except BackendError as exc:
            raise PipelineStageError(
                "scrutinize",
                f"vqa failed on segment [{segment.start}, {segment.end}): {exc}",
                completed=reports,
            ) from exc
        reports.append(
            SegmentReport(
                segment=segment,
                probability_class=probability_class,
                sampled_frames=frames,
                text=answer,
                context_from_previous=context or None,
            )
        )
        previous_text = answer
    return reports


def integrate_reports(
    reports: Sequence[SegmentReport],
    taxonomy: AnomalyTaxonomy,
    integrator: GatewayClient,
) -> tuple[str, str]:
    """Fuse segment reports into one description plus a category label."""
    if not reports:
        raise DomainError("cannot integrate an empty report list")
    response = integrator.call(
        IntegrateRequest(
            segment_reports=[r.text for r in reports],
            anomaly_list=list(taxonomy.categories),
        )
    )
    category = response.category.strip()
    if not category:
        raise CategoryError("integrator returned an empty category", raw_body=response.report)
    if category not in taxonomy.labels:
        raise CategoryError(
            f"integrator category {category!r} outside the taxonomy", raw_body=response.report
        )
    return response.report, category


def ground_anomaly(
    frame_refs: Sequence[str], description: str, vtg: GatewayClient
) -> Interval:
    """Semantic-prompted temporal grounding, normalized into ``[0, T)``.

    Reversed replies are swapped and degenerate ones widened to one frame,
    each with a warning; spans beyond the video are clipped.
    """
    if not description.strip():
        raise DomainError("grounding query must be nonempty")
    total = len(frame_refs)
    response = vtg.call(VtgRequest(frame_refs=list(frame_refs), query=description))
    start, end = response.start_frame, response.end_frame
    if start > end:
        log.warning("vtg returned a reversed span (%d, %d); swapping", start, end)
        start, end = end, start
    start = max(0, min(start, total - 1))
    end = min(end, total)
    if end <= start:
        log.warning("vtg span degenerate after clipping; widening to one frame at %d", start)
        end = start + 1
    return Interval(start=start, end=end)


def answer_qa(
    qa_items: Sequence,
    curve: SimilarityCurve,
    frame_refs: Sequence[str],
    vqa: GatewayClient,
    templates: PromptTemplates,
    *,
    n_frames: int = 8,
    mode: SampleMode = "integral",
) -> list[int | None]:
    """Answer the dataset's multiple-choice items over curve-sampled frames.

    Replies are reduced to the first standalone option letter; unparseable
    replies yield ``None`` and count as incorrect downstream.
    """
    whole = Interval(start=0, end=len(frame_refs))
    frames = sample_segment(curve, whole, n_frames, mode)
    refs = [frame_refs[f] for f in frames]
    chosen: list[int | None] = []
    for item in qa_items:
        reply = vqa.call(
            VqaRequest(frame_refs=refs, question=templates.qa(item.question, item.options), context="")
        ).answer
        chosen.append(extract_choice(reply, len(item.options)))
    return chosen


@dataclass
class PipelineBackends:
    """Gateway clients for the pipeline roles plus the embedding source."""

    caption: GatewayClient
    prompts: GatewayClient
    vqa: GatewayClient
    integrate: GatewayClient
    vtg: GatewayClient
    embeddings: EmbeddingSource


@dataclass(frozen=True)
class PipelineSettings:
    """Everything tunable about one pipeline run."""

    fusion: FusionConfig = FusionConfig()
    peaks: PeakConfig = PeakConfig()
    window: WindowConfig = WindowConfig()
    n_frames: int = 8
    use_static: bool = True
    use_dynamic: bool = True
    integral_sampling: bool = True
    contextual_understanding: bool = True
    taxonomy: AnomalyTaxonomy = DEFAULT_TAXONOMY
    phrase_bank: PhraseBank = field(default_factory=dict)
    templates: PromptTemplates = field(default_factory=load_templates)

    @property
    def sample_mode(self) -> SampleMode:
        return "integral" if self.integral_sampling else "uniform"


@dataclass(frozen=True)
class PipelineOutcome:
    report: AnomalyReport
    glance: GlanceResult
    caption: str
    prompts: PromptLists


def run_pipeline(
    video_id: str,
    frame_refs: Sequence[str],
    backends: PipelineBackends,
    settings: PipelineSettings = PipelineSettings(),
) -> PipelineOutcome:
    """Coarse grounding, fine-grained comprehension, then fine grounding.

    Stage wall-clock durations land in ``report.timing`` for throughput
    accounting. A "Normal" verdict from the integrator skips grounding and
    leaves the report ungrounded.
    """
    timing: dict[str, float] = {}
    started = time.perf_counter()

    def stage(name: str, t0: float) -> float:
        t1 = time.perf_counter()
        timing[name] = t1 - t0
        return t1

    t = started
    try:
        caption = caption_video(video_id, frame_refs, backends.caption)
        prompts = generate_prompt_lists(
            caption, settings.taxonomy, settings.phrase_bank, backends.prompts
        )
        glance = build_segments(
            video_id,
            frame_refs,
            prompts,
            backends.embeddings,
            settings.fusion,
            settings.peaks,
            settings.window,
            use_static=settings.use_static,
            use_dynamic=settings.use_dynamic,
        )
    except BackendError as exc:
        raise PipelineStageError("glance", str(exc)) from exc
    t = stage("glance", t)

    per_segment = describe_segments(
        glance.segments,
        glance.curve,
        backends.vqa,
        frame_refs,
        settings.taxonomy.categories,
        settings.templates,
        n_frames=settings.n_frames,
        mode=settings.sample_mode,
        with_context=settings.contextual_understanding,
    )
    t = stage("scrutinize", t)

    try:
        description, category = integrate_reports(per_segment, settings.taxonomy, backends.integrate)
    except BackendError as exc:
        raise PipelineStageError("integrate", str(exc)) from exc
    t = stage("integrate", t)

    grounded: Interval | None = None
    if category != NORMAL:
        try:
            grounded = ground_anomaly(frame_refs, description, backends.vtg)
        except BackendError as exc:
            raise PipelineStageError("ground", str(exc)) from exc
    t = stage("ground", t)
    timing["total"] = t - started

    report = AnomalyReport(
        description=description,
        category=category,
        grounded=grounded,
        per_segment=per_segment,
        timing=timing,
    )
    return PipelineOutcome(report=report, glance=glance, caption=caption, prompts=prompts)
