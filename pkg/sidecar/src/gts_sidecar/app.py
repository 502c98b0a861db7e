"""FastAPI app serving the nine wire-protocol endpoints."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .config import SidecarConfig
from .features import (
    ImageFeaturizer,
    TextFeaturizer,
    keywords,
    locate_salient_span,
    overlap_score,
    pool_clip,
)

log = logging.getLogger(__name__)


class _Message(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CaptionIn(_Message):
    video_id: str
    frame_refs: list[str] = Field(min_length=1)


class PromptsIn(_Message):
    caption: str
    anomaly_list: list[str]
    phrase_bank: dict[str, list[str]] = {}


class EmbedTextIn(_Message):
    texts: list[str] = Field(min_length=1)
    kind: Literal["static", "dynamic"]


class EmbedImageIn(_Message):
    frame_refs: list[str] = Field(min_length=1)


class EmbedVideoIn(_Message):
    frame_refs: list[str] = Field(min_length=1)
    window: int = Field(ge=1)
    stride: int = Field(ge=1)


class VqaIn(_Message):
    frame_refs: list[str] = Field(min_length=1)
    question: str
    context: str = ""


class IntegrateIn(_Message):
    segment_reports: list[str] = Field(min_length=1)
    anomaly_list: list[str]


class VtgIn(_Message):
    frame_refs: list[str] = Field(min_length=1)
    query: str


class JudgeIn(_Message):
    prediction: str
    reference: str


class RefError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


def create_app(config: SidecarConfig) -> FastAPI:
    app = FastAPI(title="gts sidecar", version="0.1.0")
    root = Path(config.frame_root).resolve()
    text_model = TextFeaturizer(config.embed_dim)
    image_model = ImageFeaturizer(config.embed_dim)
    if any(model_id not in ("", "builtin") for model_id in config.models.values()):
        log.warning(
            "non-builtin model ids configured (%s); this build serves the builtin "
            "featurizers only, ids are recorded as opaque labels",
            config.models,
        )

    def resolve(ref: str) -> Path:
        candidate = (root / ref).resolve()
        if not candidate.is_relative_to(root):
            raise RefError(400, "invalid_ref", f"frame ref {ref!r} escapes the frame root")
        if not candidate.is_file():
            raise RefError(404, "missing_frame", f"frame ref {ref!r} not found")
        return candidate

    @app.exception_handler(RefError)
    async def _ref_error(request: Request, exc: RefError):
        return JSONResponse(status_code=exc.status, content={"error": exc.error, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def _invalid(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422, content={"error": "validation_error", "detail": str(exc.errors())}
        )

    @app.exception_handler(Exception)
    async def _boom(request: Request, exc: Exception):
        log.exception("request failed")
        return JSONResponse(status_code=500, content={"error": "internal", "detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/v1/caption")
    def caption(body: CaptionIn):
        lumas = [image_model.mean_luminance(resolve(ref)) for ref in body.frame_refs]
        mean = sum(lumas) / len(lumas)
        spread = max(lumas) - min(lumas)
        tone = "stable lighting" if spread < 16 else "visible changes in lighting"
        return {
            "caption": (
                f"A sequence of {len(lumas)} frames with mean brightness "
                f"{mean:.0f}/255 and {tone}."
            )
        }

    @app.post("/v1/prompts")
    def prompts(body: PromptsIn):
        static = keywords(body.caption) + ["the scene overall"]
        dynamic: list[str] = []
        for category in body.anomaly_list:
            for phrase in body.phrase_bank.get(category, [])[:1]:
                dynamic.append(phrase)
            if len(dynamic) >= 3:
                break
        if not dynamic:
            dynamic = ["sudden movement", "gradual activity"]
        return {"static": static, "dynamic": dynamic}

    @app.post("/v1/embed_text")
    def embed_text(body: EmbedTextIn):
        vectors = text_model.embed_many(body.texts)
        return {"dim": config.embed_dim, "vectors": vectors.tolist()}

    @app.post("/v1/embed_image")
    def embed_image(body: EmbedImageIn):
        import numpy as np

        vectors = np.stack([image_model.embed(resolve(ref)) for ref in body.frame_refs])
        return {"dim": config.embed_dim, "vectors": vectors.tolist()}

    @app.post("/v1/embed_video")
    def embed_video(body: EmbedVideoIn):
        import numpy as np

        frames = np.stack([image_model.embed(resolve(ref)) for ref in body.frame_refs])
        starts = list(range(0, len(body.frame_refs), body.stride))
        clips = [pool_clip(frames[s : s + body.window]) for s in starts]
        return {
            "dim": config.embed_dim,
            "clip_starts": starts,
            "vectors": np.stack(clips).tolist(),
        }

    @app.post("/v1/vqa")
    def vqa(body: VqaIn):
        lumas = [image_model.mean_luminance(resolve(ref)) for ref in body.frame_refs]
        spread = max(lumas) - min(lumas)
        if spread < 16:
            answer = (
                f"The {len(lumas)} sampled frames show steady illumination; "
                "no abrupt visual change stands out."
            )
        else:
            answer = (
                f"The {len(lumas)} sampled frames include a marked brightness "
                f"shift of {spread:.0f}/255, suggesting a visual event."
            )
        return {"answer": answer}

    @app.post("/v1/integrate")
    def integrate(body: IntegrateIn):
        unique: list[str] = []
        for text in body.segment_reports:
            if text not in unique:
                unique.append(text)
        joined = " ".join(unique)
        lowered = joined.lower()
        category = "Normal"
        for name in body.anomaly_list:
            if name.lower() in lowered:
                category = name
                break
        return {"report": joined, "category": category}

    @app.post("/v1/vtg")
    def vtg(body: VtgIn):
        lumas = [image_model.mean_luminance(resolve(ref)) for ref in body.frame_refs]
        start, end = locate_salient_span(lumas)
        return {"start_frame": start, "end_frame": end}

    @app.post("/v1/judge")
    def judge(body: JudgeIn):
        score = overlap_score(body.prediction, body.reference)
        return {
            "subject": score,
            "scene": score,
            "course_of_events": score,
            "impact": score,
            "rationale": f"word-overlap score {score}/10 between prediction and reference",
        }

    return app
