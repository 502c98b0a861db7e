"""Deterministic demo dataset: three synthetic videos with engineered
embeddings, scripted mock rules, and a ready-to-run mock-mode config.

The embeddings are constructed so the fused curve provably peaks where each
fixture expects: frame vectors are rotations between a prompt-aligned axis
and an orthogonal one, making the mean cosine profile an explicit function
of the frame index. The builder re-derives the glance outputs and refuses
to write a dataset that would not segment as documented.

Build from the command line with ``python -m gts.fixtures <outdir>``.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bench.config import BenchConfig
from .curve import FusionConfig, PeakConfig, WindowConfig
from .dataset.annotations import VideoAnnotation, write_annotations
from .dataset.embeddings import EmbeddingMatrix, write_embeddings
from .glance import PromptLists, PrecomputedEmbeddingSource, build_segments
from .metrics import Interval

DIM = 16
CLIP_WINDOW = 16
CLIP_STRIDE = 8
MOCK_SEED = 7

STREET_FIRE = "street-fire"
LOT_THEFT = "lot-theft"
PARK_NORMAL = "park-normal"


@dataclass(frozen=True)
class DemoDataset:
    root: Path
    annotations_path: Path
    frame_root: Path
    embeddings_dir: Path
    mock_rules_path: Path
    config_path: Path


def _bump(t: np.ndarray, center: int, half_width: int, height: float) -> np.ndarray:
    return height * np.clip(1.0 - np.abs(t - center) / half_width, 0.0, None)


def _cosine_profile(video_id: str, total: int) -> np.ndarray:
    t = np.arange(total, dtype=np.float64)
    if video_id == STREET_FIRE:
        return 0.1 + _bump(t, 50, 6, 0.8)
    if video_id == LOT_THEFT:
        return 0.1 + _bump(t, 30, 6, 0.75) + _bump(t, 70, 6, 0.7)
    if video_id == PARK_NORMAL:
        return np.full(total, 0.15)
    raise KeyError(video_id)


def _rotation_rows(cosines: np.ndarray, axis_a: int, axis_b: int) -> np.ndarray:
    """Unit rows ``cos*e_a + sin*e_b``; their dot with ``e_a`` is the cosine."""
    rows = np.zeros((len(cosines), DIM), dtype=np.float64)
    rows[:, axis_a] = cosines
    rows[:, axis_b] = np.sqrt(1.0 - cosines**2)
    return rows


def _axis_rows(count: int, axis: int) -> np.ndarray:
    rows = np.zeros((count, DIM), dtype=np.float64)
    rows[:, axis] = 1.0
    return rows


ANNOTATIONS = [
    VideoAnnotation(
        video_id=STREET_FIRE,
        duration_frames=100,
        fps=10.0,
        category="Fire",
        grounding=[Interval(start=45, end=55)],
        description=(
            "A fire breaks out at a street food stall, flames spreading across "
            "the canopy while bystanders retreat."
        ),
        qa=[
            {
                "question": "What anomaly occurs in the video?",
                "options": ["A flood", "A fire at a stall", "A robbery"],
                "answer_index": 1,
            },
            {
                "question": "Where does the anomaly take place?",
                "options": ["At a food stall", "In a parking lot"],
                "answer_index": 0,
            },
        ],
    ),
    VideoAnnotation(
        video_id=LOT_THEFT,
        duration_frames=120,
        fps=12.0,
        category="Stealing",
        grounding=[Interval(start=60, end=84)],
        description=(
            "A man loiters in a parking lot, conceals items taken from an "
            "unlocked trunk, and walks away with them."
        ),
        qa=[
            {
                "question": "What is taken?",
                "options": ["A bicycle", "Items from a trunk"],
                "answer_index": 1,
            },
            {
                "question": "How does the thief behave?",
                "options": ["Runs immediately", "Conceals items then walks away", "Asks for help"],
                "answer_index": 1,
            },
            {
                "question": "What time of day is it?",
                "options": ["Daytime", "Night"],
                "answer_index": 0,
            },
        ],
    ),
    VideoAnnotation(
        video_id=PARK_NORMAL,
        duration_frames=80,
        fps=8.0,
        category="Normal",
        grounding=[],
        description="People stroll through a park; nothing unusual happens.",
        qa=[
            {
                "question": "What happens in the video?",
                "options": ["A fight breaks out", "People walk in a park"],
                "answer_index": 1,
            },
            {
                "question": "How many anomalies occur?",
                "options": ["None", "One", "Two"],
                "answer_index": 0,
            },
        ],
    ),
]

CAPTIONS = {
    STREET_FIRE: "A street food stall with people browsing at dusk.",
    LOT_THEFT: "A man stands near parked cars in a quiet lot.",
    PARK_NORMAL: "People walk along tree-lined paths in a park.",
}

PROMPTS = {
    STREET_FIRE: PromptLists(
        static=("a street food stall", "people at a market", "an evening street"),
        dynamic=("people browsing stalls", "flames flaring up", "a crowd backing away"),
    ),
    LOT_THEFT: PromptLists(
        static=("a parking lot", "parked cars", "a man near a trunk"),
        dynamic=("a man opening a trunk", "concealing an object", "walking away quickly"),
    ),
    PARK_NORMAL: PromptLists(
        static=("a city park", "tree-lined paths", "people outdoors"),
        dynamic=("people walking", "casual strolling", "children playing"),
    ),
}

# VQA answers keyed by (video, segment class). The high-probability answers
# carry an explicit frame span the grounding model can lock onto.
VQA_HIGH = {
    STREET_FIRE: (
        "A fire erupts at the food stall between frames 45 and 55, flames "
        "climbing the canopy while bystanders back away."
    ),
    LOT_THEFT: (
        "A man conceals items lifted from an unlocked trunk, stealing them "
        "between frames 58 and 86 before walking off."
    ),
    PARK_NORMAL: "People continue strolling; no irregular behavior is visible.",
}
VQA_LOW = {
    STREET_FIRE: "People browse the stalls calmly; a faint haze drifts near the canopy.",
    LOT_THEFT: "Cars sit parked in even rows; a lone figure lingers by a trunk.",
    PARK_NORMAL: "Walkers pass along the paths under the trees at an easy pace.",
}

QA_REPLIES = {
    (STREET_FIRE, 0): "B",
    (STREET_FIRE, 1): "A. At a food stall.",
    (LOT_THEFT, 0): "B",
    (LOT_THEFT, 1): "The answer is B.",
    (LOT_THEFT, 2): "It is unclear.",  # unparseable on purpose: counts as wrong
    (PARK_NORMAL, 0): "B",
    (PARK_NORMAL, 1): "A",
}

JUDGE_ASPECTS = {
    STREET_FIRE: {"subject": 9, "scene": 9, "course_of_events": 8, "impact": 9},
    LOT_THEFT: {"subject": 8, "scene": 7, "course_of_events": 8, "impact": 7},
    PARK_NORMAL: {"subject": 9, "scene": 9, "course_of_events": 9, "impact": 9},
}

# Glance outputs the engineered embeddings must reproduce (base config).
EXPECTED_SCREENED = {STREET_FIRE: (50,), LOT_THEFT: (30, 70), PARK_NORMAL: (0,)}
EXPECTED_HIGH = {
    STREET_FIRE: (Interval(start=45, end=55),),
    LOT_THEFT: (Interval(start=24, end=36), Interval(start=64, end=76)),
    PARK_NORMAL: (Interval(start=0, end=4),),
}


def _mock_rules() -> list[dict]:
    rules: list[dict] = []
    for annotation in ANNOTATIONS:
        vid = annotation.video_id
        rules.append(
            {
                "role": "caption",
                "match": {"video_id": vid},
                "response": {"caption": CAPTIONS[vid]},
            }
        )
        prompts = PROMPTS[vid]
        rules.append(
            {
                "role": "prompts",
                "match": {"caption": CAPTIONS[vid]},
                "response": {"static": list(prompts.static), "dynamic": list(prompts.dynamic)},
            }
        )
        rules.append(
            {
                "role": "vqa",
                "match": {"frame_refs~": f"{vid}/", "question~": "high likelihood"},
                "response": {"answer": VQA_HIGH[vid]},
            }
        )
        rules.append(
            {
                "role": "vqa",
                "match": {"frame_refs~": f"{vid}/", "question~": "subtle clues"},
                "response": {"answer": VQA_LOW[vid]},
            }
        )
        for index, item in enumerate(annotation.qa):
            rules.append(
                {
                    "role": "vqa",
                    "match": {"frame_refs~": f"{vid}/", "question~": item.question},
                    "response": {"answer": QA_REPLIES[(vid, index)]},
                }
            )
        rules.append(
            {
                "role": "judge",
                "match": {"reference": annotation.description},
                "response": {**JUDGE_ASPECTS[vid], "rationale": f"scripted verdict for {vid}"},
            }
        )
    return rules


def _write_frames(frame_root: Path, video_id: str, total: int, anomalous: np.ndarray) -> None:
    from PIL import Image

    directory = frame_root / video_id
    directory.mkdir(parents=True, exist_ok=True)
    for t in range(total):
        base = 40 + (t * 7) % 60
        pixels = np.full((8, 8, 3), base, dtype=np.uint8)
        if anomalous[t]:
            pixels[2:6, 2:6] = (220, 60 + base // 2, 30)
        Image.fromarray(pixels, "RGB").save(directory / f"{t:06d}.png")


def _write_embeddings(embeddings_dir: Path, video_id: str, total: int) -> None:
    cosines = _cosine_profile(video_id, total)
    frames = _rotation_rows(cosines, axis_a=0, axis_b=1)
    clip_starts = list(range(0, total, CLIP_STRIDE))
    clips = _rotation_rows(np.full(len(clip_starts), 0.2), axis_a=2, axis_b=3)
    static_text = _axis_rows(3, axis=0)
    dynamic_text = _axis_rows(3, axis=2)
    embeddings_dir.mkdir(parents=True, exist_ok=True)
    write_embeddings(
        embeddings_dir / f"{video_id}.frames.gtsemb",
        EmbeddingMatrix(data=frames.astype(np.float32), kind="image"),
    )
    write_embeddings(
        embeddings_dir / f"{video_id}.clips.gtsemb",
        EmbeddingMatrix(
            data=clips.astype(np.float32),
            kind="video_clip",
            clip_window=CLIP_WINDOW,
            clip_stride=CLIP_STRIDE,
        ),
    )
    write_embeddings(
        embeddings_dir / f"{video_id}.text-static.gtsemb",
        EmbeddingMatrix(data=static_text.astype(np.float32), kind="text"),
    )
    write_embeddings(
        embeddings_dir / f"{video_id}.text-dynamic.gtsemb",
        EmbeddingMatrix(data=dynamic_text.astype(np.float32), kind="text"),
    )


def _verify_glance(embeddings_dir: Path, annotation: VideoAnnotation) -> None:
    source = PrecomputedEmbeddingSource(embeddings_dir)
    refs = [f"{annotation.video_id}/{t:06d}.png" for t in range(annotation.duration_frames)]
    result = build_segments(
        annotation.video_id,
        refs,
        PROMPTS[annotation.video_id],
        source,
        FusionConfig(),
        PeakConfig(),
        WindowConfig(),
    )
    expected_screened = EXPECTED_SCREENED[annotation.video_id]
    expected_high = EXPECTED_HIGH[annotation.video_id]
    if result.screened != expected_screened or result.segments.high != expected_high:
        raise AssertionError(
            f"{annotation.video_id}: engineered embeddings produced screened="
            f"{result.screened}, high={result.segments.high}; expected "
            f"{expected_screened} / {expected_high}"
        )


def build_demo_dataset(root: str | Path, *, write_frames: bool = True) -> DemoDataset:
    """Materialize the demo dataset under ``root`` and return its paths."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    frame_root = root / "frames"
    embeddings_dir = root / "embeddings"
    annotations_path = root / "annotations.json"
    mock_rules_path = root / "mock_rules.json"
    config_path = root / "config.json"

    write_annotations(annotations_path, ANNOTATIONS)
    for annotation in ANNOTATIONS:
        _write_embeddings(embeddings_dir, annotation.video_id, annotation.duration_frames)
        _verify_glance(embeddings_dir, annotation)
        if write_frames:
            anomalous = np.zeros(annotation.duration_frames, dtype=bool)
            for interval in annotation.grounding:
                anomalous[interval.start : interval.end] = True
            _write_frames(frame_root, annotation.video_id, annotation.duration_frames, anomalous)
    mock_rules_path.write_text(json.dumps(_mock_rules(), indent=2), encoding="utf-8")

    config = BenchConfig.model_validate(
        {
            "dataset": {
                "annotations": str(annotations_path),
                "frame_root": str(frame_root),
                "embeddings_dir": str(embeddings_dir),
            },
            "mock": {
                "enabled": True,
                "seed": MOCK_SEED,
                "rules_path": str(mock_rules_path),
                "embed_dim": DIM,
            },
            "runs_root": str(root / "runs"),
        }
    )
    config_path.write_text(
        json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True), encoding="utf-8"
    )
    return DemoDataset(
        root=root,
        annotations_path=annotations_path,
        frame_root=frame_root,
        embeddings_dir=embeddings_dir,
        mock_rules_path=mock_rules_path,
        config_path=config_path,
    )


def main(argv: list[str] | None = None) -> int:
    args = argv if argv is not None else sys.argv[1:]
    if len(args) != 1:
        print("usage: python -m gts.fixtures <output-directory>", file=sys.stderr)
        return 64
    dataset = build_demo_dataset(args[0])
    print(f"demo dataset written to {dataset.root}")
    print(f"config: {dataset.config_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
