"""Scrutinize orchestration: sampling, chained VQA, integration, grounding."""

from __future__ import annotations

import numpy as np
import pytest

from gts.curve import SegmentSet, SimilarityCurve
from gts.dataset.results import strip_timing
from gts.errors import CategoryError, DomainError, PipelineStageError
from gts.fixtures import LOT_THEFT, PARK_NORMAL, STREET_FIRE
from gts.gateway import MockBackend, MockRule
from gts.glance import PrecomputedEmbeddingSource
from gts.metrics import Interval
from gts.reports import SegmentReport
from gts.scrutinize import (
    PipelineBackends,
    PipelineSettings,
    answer_qa,
    describe_segments,
    ground_anomaly,
    integrate_reports,
    run_pipeline,
    sample_segment,
)
from gts.taxonomy import DEFAULT_TAXONOMY
from gts.templates import load_templates

TEMPLATES = load_templates()


def flat_curve(n: int) -> SimilarityCurve:
    return SimilarityCurve(values=np.full(n, 1.0 / n))


class TestSampleSegment:
    def test_uniform_midpoints(self):
        curve = flat_curve(100)
        assert sample_segment(curve, Interval(start=0, end=100), 4, "uniform") == [12, 37, 62, 87]

    def test_integral_matches_curve_engine(self):
        curve = flat_curve(100)
        assert sample_segment(curve, Interval(start=0, end=100), 4, "integral") == [24, 49, 74, 99]

    def test_single_frame_either_mode(self):
        curve = flat_curve(50)
        seg = Interval(start=10, end=20)
        for mode in ("integral", "uniform"):
            out = sample_segment(curve, seg, 1, mode)
            assert len(out) == 1 and out[0] in seg

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            sample_segment(flat_curve(10), Interval(start=0, end=10), 2, "stochastic")


def two_high_segments() -> SegmentSet:
    return SegmentSet(
        high=(Interval(start=10, end=20), Interval(start=40, end=50)),
        low=(Interval(start=0, end=10), Interval(start=20, end=40)),
        peaks=(15, 45),
    )


def vqa_mock() -> MockBackend:
    return MockBackend(
        rules=[
            MockRule(
                role="vqa",
                match={"question~": "high likelihood", "frame_refs~": "v/00001"},
                response={"answer": "first high answer"},
            ),
            MockRule(
                role="vqa",
                match={"question~": "high likelihood", "frame_refs~": "v/00004"},
                response={"answer": "second high answer"},
            ),
            MockRule(role="vqa", match={"question~": "subtle clues"}, response={"answer": "calm"}),
        ]
    )


class TestDescribeSegments:
    def refs(self, n: int = 60) -> list[str]:
        return [f"v/{i:05d}" for i in range(n)]

    def test_temporal_order_and_classes(self):
        mock = vqa_mock()
        reports = describe_segments(
            two_high_segments(),
            flat_curve(60),
            mock.client("vqa"),
            self.refs(),
            DEFAULT_TAXONOMY.categories,
            TEMPLATES,
            n_frames=4,
        )
        assert [r.probability_class for r in reports] == ["low", "high", "low", "high"]
        starts = [r.segment.start for r in reports]
        assert starts == sorted(starts)
        assert all(f in r.segment for r in reports for f in r.sampled_frames)

    def test_context_chains_exactly_one_step(self):
        mock = vqa_mock()
        reports = describe_segments(
            two_high_segments(),
            flat_curve(60),
            mock.client("vqa"),
            self.refs(),
            DEFAULT_TAXONOMY.categories,
            TEMPLATES,
            n_frames=4,
            with_context=True,
        )
        assert reports[0].context_from_previous is None
        for prev, current in zip(reports, reports[1:]):
            assert current.context_from_previous == prev.text
        requests = mock.calls("vqa")
        assert requests[1]["context"] == reports[0].text
        assert requests[2]["context"] == reports[1].text

    def test_context_off_empties_all_fields(self):
        mock = vqa_mock()
        reports = describe_segments(
            two_high_segments(),
            flat_curve(60),
            mock.client("vqa"),
            self.refs(),
            DEFAULT_TAXONOMY.categories,
            TEMPLATES,
            n_frames=4,
            with_context=False,
        )
        assert all(r.context_from_previous is None for r in reports)
        assert all(request["context"] == "" for request in mock.calls("vqa"))

    def test_high_gets_taxonomy_low_gets_caption_question(self):
        mock = vqa_mock()
        describe_segments(
            two_high_segments(),
            flat_curve(60),
            mock.client("vqa"),
            self.refs(),
            DEFAULT_TAXONOMY.categories,
            TEMPLATES,
            n_frames=4,
        )
        requests = mock.calls("vqa")
        assert "Fire" in requests[1]["question"] and "Arrest" in requests[1]["question"]
        assert "subtle clues" in requests[0]["question"]

    def test_backend_failure_aborts_with_partial_results(self):
        mock = MockBackend(
            rules=[
                MockRule(role="vqa", match={"question~": "subtle clues"}, response={"answer": "ok"})
            ],
            strict_roles={"vqa"},
        )
        with pytest.raises(PipelineStageError) as err:
            describe_segments(
                two_high_segments(),
                flat_curve(60),
                mock.client("vqa"),
                self.refs(),
                DEFAULT_TAXONOMY.categories,
                TEMPLATES,
                n_frames=4,
            )
        assert err.value.stage == "scrutinize"
        assert len(err.value.completed) == 1  # the first (low) segment succeeded


class TestIntegrate:
    def reports(self, *texts: str) -> list[SegmentReport]:
        return [
            SegmentReport(
                segment=Interval(start=i * 10, end=i * 10 + 10),
                probability_class="high",
                sampled_frames=[i * 10],
                text=text,
            )
            for i, text in enumerate(texts)
        ]

    def test_single_report_still_integrates(self):
        mock = MockBackend()
        description, category = integrate_reports(
            self.reports("nothing of note"), DEFAULT_TAXONOMY, mock.client("integrate")
        )
        assert category == "Normal"
        assert (len(mock.calls("integrate"))) == 1

    def test_theft_clues_across_segments(self):
        mock = MockBackend()
        description, category = integrate_reports(
            self.reports("a man conceals an item", "he walks off, stealing it"),
            DEFAULT_TAXONOMY,
            mock.client("integrate"),
        )
        assert category == "Stealing"

    def test_category_outside_taxonomy(self):
        mock = MockBackend(
            rules=[
                MockRule(
                    role="integrate", match={}, response={"report": "r", "category": "Meteor"}
                )
            ]
        )
        with pytest.raises(CategoryError, match="Meteor"):
            integrate_reports(self.reports("x"), DEFAULT_TAXONOMY, mock.client("integrate"))


class TestGroundAnomaly:
    def refs(self, n: int = 100) -> list[str]:
        return [f"v/{i}" for i in range(n)]

    def scripted(self, start: int, end: int) -> MockBackend:
        return MockBackend(
            rules=[
                MockRule(
                    role="vtg", match={}, response={"start_frame": start, "end_frame": end}
                )
            ]
        )

    def test_verbatim_span(self):
        mock = self.scripted(30, 60)
        assert ground_anomaly(self.refs(), "the event", mock.client("vtg")) == Interval(
            start=30, end=60
        )

    def test_reversed_span_swapped(self, caplog):
        mock = self.scripted(60, 30)
        with caplog.at_level("WARNING"):
            interval = ground_anomaly(self.refs(), "the event", mock.client("vtg"))
        assert interval == Interval(start=30, end=60)
        assert "reversed" in caplog.text

    def test_overlong_span_clipped(self):
        mock = self.scripted(90, 250)
        assert ground_anomaly(self.refs(), "q", mock.client("vtg")) == Interval(start=90, end=100)

    def test_degenerate_span_widened(self, caplog):
        mock = self.scripted(5, 5)
        with caplog.at_level("WARNING"):
            interval = ground_anomaly(self.refs(), "q", mock.client("vtg"))
        assert interval == Interval(start=5, end=6)
        assert "degenerate" in caplog.text


class TestAnswerQa:
    def test_letters_extracted(self, demo_dataset):
        class Item:
            def __init__(self, question, options):
                self.question = question
                self.options = options

        mock = MockBackend(
            rules=[
                MockRule(role="vqa", match={"question~": "first?"}, response={"answer": "B."}),
                MockRule(role="vqa", match={"question~": "second?"}, response={"answer": "hmm"}),
            ]
        )
        chosen = answer_qa(
            [Item("first?", ["x", "y"]), Item("second?", ["x", "y", "z"])],
            flat_curve(40),
            [f"v/{i}" for i in range(40)],
            mock.client("vqa"),
            TEMPLATES,
            n_frames=4,
        )
        assert chosen == [1, None]


def demo_backends(demo_dataset) -> tuple[PipelineBackends, MockBackend]:
    from gts.gateway.mock import load_rules

    mock = MockBackend(seed=7, rules=load_rules(demo_dataset.mock_rules_path), embed_dim=16)
    backends = PipelineBackends(
        caption=mock.client("caption"),
        prompts=mock.client("prompts"),
        vqa=mock.client("vqa"),
        integrate=mock.client("integrate"),
        vtg=mock.client("vtg"),
        embeddings=PrecomputedEmbeddingSource(demo_dataset.embeddings_dir),
    )
    return backends, mock


class TestRunPipeline:
    def test_street_fire_fixture(self, demo_dataset):
        backends, mock = demo_backends(demo_dataset)
        refs = [f"{STREET_FIRE}/{t:06d}.png" for t in range(100)]
        outcome = run_pipeline(STREET_FIRE, refs, backends, PipelineSettings())
        report = outcome.report
        assert report.category == "Fire"
        assert report.grounded == Interval(start=45, end=55)
        assert [r.probability_class for r in report.per_segment] == ["low", "high", "low"]
        assert set(report.timing) >= {"glance", "scrutinize", "integrate", "ground", "total"}
        # one vqa call per segment, no more
        assert len(mock.calls("vqa")) == 3

    def test_normal_fixture_skips_grounding(self, demo_dataset):
        backends, mock = demo_backends(demo_dataset)
        refs = [f"{PARK_NORMAL}/{t:06d}.png" for t in range(80)]
        outcome = run_pipeline(PARK_NORMAL, refs, backends, PipelineSettings())
        assert outcome.report.category == "Normal"
        assert outcome.report.grounded is None
        assert mock.calls("vtg") == []

    def test_deterministic_reports_excluding_timing(self, demo_dataset):
        refs = [f"{LOT_THEFT}/{t:06d}.png" for t in range(120)]
        dumps = []
        for _ in range(2):
            backends, _ = demo_backends(demo_dataset)
            outcome = run_pipeline(LOT_THEFT, refs, backends, PipelineSettings())
            dumps.append(strip_timing(outcome.report.model_dump(mode="json")))
        assert dumps[0] == dumps[1]

    def test_ablation_flag_changes_only_curve_path(self, demo_dataset):
        backends, _ = demo_backends(demo_dataset)
        refs = [f"{STREET_FIRE}/{t:06d}.png" for t in range(100)]
        base = run_pipeline(STREET_FIRE, refs, backends, PipelineSettings())
        backends2, _ = demo_backends(demo_dataset)
        static_only = run_pipeline(
            STREET_FIRE, refs, backends2, PipelineSettings(use_dynamic=False)
        )
        assert not np.array_equal(base.glance.curve.values, static_only.glance.curve.values)
        assert static_only.glance.dynamic_curve is None
        assert base.report.category == static_only.report.category == "Fire"

    def test_call_counts_auditable(self, demo_dataset):
        backends, mock = demo_backends(demo_dataset)
        refs = [f"{LOT_THEFT}/{t:06d}.png" for t in range(120)]
        outcome = run_pipeline(LOT_THEFT, refs, backends, PipelineSettings())
        n_high = len([r for r in outcome.report.per_segment if r.probability_class == "high"])
        n_low = len(outcome.report.per_segment) - n_high
        assert n_high == 2 and n_low == 3
        assert len(mock.calls("vqa")) == n_high + n_low
        assert len(mock.calls("caption")) == 1
        assert len(mock.calls("integrate")) == 1
