"""Ablation runs: flag variants against a base config, with metric deltas."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from pydantic import BaseModel, ConfigDict

from ..dataset.annotations import load_annotations
from ..dataset.results import list_run_records, strip_timing
from ..errors import UsageError
from ..gateway.client import GatewayClient
from .config import AblationFlags, BenchConfig
from .evaluate import SummaryTable, evaluate_run
from .runner import RunOutcome, run_batch

# The four canonical single-flag ablations.
DEFAULT_VARIANTS: dict[str, dict[str, bool]] = {
    "no_dynamic_guidance": {"dynamic_guidance": False},
    "no_static_guidance": {"static_guidance": False},
    "no_integral_sampling": {"integral_sampling": False},
    "no_contextual_understanding": {"contextual_understanding": False},
}

BASE_NAME = "base"


class AblationRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    au_mean: float | None = None
    jeaug_mean: float | None = None
    qa_accuracy: float | None = None
    fps: float = 0.0
    delta_au: float | None = None
    delta_jeaug: float | None = None
    delta_qa: float | None = None


class AblationResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rows: list[AblationRow]
    run_dirs: dict[str, str]


def _delta(variant: float | None, base: float | None) -> float | None:
    if variant is None or base is None:
        return None
    return variant - base


def _variant_config(base: BenchConfig, name: str, overrides: Mapping[str, bool]) -> BenchConfig:
    unknown = set(overrides) - set(AblationFlags.model_fields)
    if unknown:
        raise UsageError(f"variant {name!r} sets unknown ablation flags: {sorted(unknown)}")
    ablation = base.ablation.model_copy(update=dict(overrides))
    run_id = (base.run_id or "ablate") + f"-{name}"
    return base.model_copy(update={"ablation": ablation, "run_id": run_id})


def run_ablation(
    base: BenchConfig,
    judge: GatewayClient,
    variants: Mapping[str, Mapping[str, bool]] | None = None,
) -> AblationResult:
    """Run base plus each variant, evaluate all, and difference the metrics.

    Deltas cover the deterministic score columns only; throughput is
    reported but never differenced. Requires at least two configurations in
    total (the base counts as one).
    """
    variants = dict(variants) if variants is not None else dict(DEFAULT_VARIANTS)
    if BASE_NAME in variants:
        raise UsageError(f"variant name {BASE_NAME!r} is reserved")
    if len(variants) < 1:
        raise UsageError("ablation needs at least one variant beside the base")
    annotations = load_annotations(base.dataset.annotations)

    configs: dict[str, BenchConfig] = {
        BASE_NAME: base.model_copy(update={"run_id": (base.run_id or "ablate") + f"-{BASE_NAME}"})
    }
    for name, overrides in variants.items():
        configs[name] = _variant_config(base, name, overrides)

    outcomes: dict[str, RunOutcome] = {}
    tables: dict[str, SummaryTable] = {}
    for name, config in configs.items():
        outcome = run_batch(config)
        if outcome.exit_code != 0:
            failed = ", ".join(f.video_id for f in outcome.summary.failures)
            raise UsageError(f"ablation run {name!r} had failures: {failed}")
        outcomes[name] = outcome
        tables[name] = evaluate_run(outcome.run_dir, annotations, judge)

    base_overall = tables[BASE_NAME].overall
    rows = []
    for name in configs:
        overall = tables[name].overall
        rows.append(
            AblationRow(
                name=name,
                au_mean=overall.au_mean,
                jeaug_mean=overall.jeaug_mean,
                qa_accuracy=overall.qa_accuracy,
                fps=overall.fps,
                delta_au=_delta(overall.au_mean, base_overall.au_mean),
                delta_jeaug=_delta(overall.jeaug_mean, base_overall.jeaug_mean),
                delta_qa=_delta(overall.qa_accuracy, base_overall.qa_accuracy),
            )
        )
    return AblationResult(
        rows=rows, run_dirs={name: str(outcomes[name].run_dir) for name in configs}
    )


def diff_artifacts(run_dir_a: str | Path, run_dir_b: str | Path) -> dict[str, list[str]]:
    """Per-video artifact fields that differ between two runs (timing ignored).

    Covers the persisted stage artifacts and the per-segment reports; used
    to demonstrate that each ablation flag leaves an observable trace.
    """
    records_a = {r.video_id: r for r in list_run_records(run_dir_a)}
    records_b = {r.video_id: r for r in list_run_records(run_dir_b)}
    out: dict[str, list[str]] = {}
    for video_id in sorted(set(records_a) | set(records_b)):
        if video_id not in records_a or video_id not in records_b:
            out[video_id] = ["<record missing>"]
            continue
        a, b = records_a[video_id], records_b[video_id]
        fields: list[str] = []
        art_a, art_b = a.artifacts.model_dump(), b.artifacts.model_dump()
        for key in art_a:
            if art_a[key] != art_b[key]:
                fields.append(f"artifacts.{key}")
        rep_a = strip_timing(a.report.model_dump(mode="json"))
        rep_b = strip_timing(b.report.model_dump(mode="json"))
        for key in ("description", "category", "grounded"):
            if rep_a[key] != rep_b[key]:
                fields.append(f"report.{key}")
        segs_a, segs_b = rep_a["per_segment"], rep_b["per_segment"]
        if json.dumps(segs_a, sort_keys=True) != json.dumps(segs_b, sort_keys=True):
            seg_fields = set()
            for seg_a, seg_b in zip(segs_a, segs_b):
                for key in seg_a:
                    if seg_a[key] != seg_b[key]:
                        seg_fields.add(f"per_segment.{key}")
            if len(segs_a) != len(segs_b):
                seg_fields.add("per_segment.<count>")
            fields.extend(sorted(seg_fields))
        if a.qa_chosen != b.qa_chosen:
            fields.append("qa_chosen")
        if fields:
            out[video_id] = fields
    return out
