"""Typed wire-protocol messages for the nine model roles.

All endpoints are POST with UTF-8 JSON bodies; errors come back as non-200
responses carrying ``{error, detail}``. ``canonical_json`` defines the byte
form used for round-trip guarantees and request fingerprinting.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Literal, Type

from pydantic import BaseModel, ConfigDict, Field

Role = Literal[
    "caption",
    "prompts",
    "embed_text",
    "embed_image",
    "embed_video",
    "vqa",
    "integrate",
    "vtg",
    "judge",
]

ROLES: tuple[str, ...] = (
    "caption",
    "prompts",
    "embed_text",
    "embed_image",
    "embed_video",
    "vqa",
    "integrate",
    "vtg",
    "judge",
)


class _Message(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CaptionRequest(_Message):
    video_id: str
    frame_refs: list[str] = Field(min_length=1)


class CaptionResponse(_Message):
    caption: str


class PromptsRequest(_Message):
    caption: str
    anomaly_list: list[str]
    phrase_bank: dict[str, list[str]] = {}


class PromptsResponse(_Message):
    static: list[str]
    dynamic: list[str]


class EmbedTextRequest(_Message):
    texts: list[str] = Field(min_length=1)
    kind: Literal["static", "dynamic"]


class EmbedVectorsResponse(_Message):
    dim: int = Field(ge=1)
    vectors: list[list[float]]


class EmbedImageRequest(_Message):
    frame_refs: list[str] = Field(min_length=1)


class EmbedVideoRequest(_Message):
    frame_refs: list[str] = Field(min_length=1)
    window: int = Field(ge=1)
    stride: int = Field(ge=1)


class EmbedClipsResponse(_Message):
    dim: int = Field(ge=1)
    clip_starts: list[int]
    vectors: list[list[float]]


class VqaRequest(_Message):
    frame_refs: list[str] = Field(min_length=1)
    question: str
    context: str = ""


class VqaResponse(_Message):
    answer: str


class IntegrateRequest(_Message):
    segment_reports: list[str] = Field(min_length=1)
    anomaly_list: list[str]


class IntegrateResponse(_Message):
    report: str
    category: str


class VtgRequest(_Message):
    frame_refs: list[str] = Field(min_length=1)
    query: str


class VtgResponse(_Message):
    start_frame: int
    end_frame: int


class JudgeRequest(_Message):
    prediction: str
    reference: str


class JudgeResponse(_Message):
    subject: int = Field(ge=1, le=10)
    scene: int = Field(ge=1, le=10)
    course_of_events: int = Field(ge=1, le=10)
    impact: int = Field(ge=1, le=10)
    rationale: str = ""


class ErrorBody(_Message):
    error: str
    detail: str = ""


REQUEST_TYPES: dict[str, Type[BaseModel]] = {
    "caption": CaptionRequest,
    "prompts": PromptsRequest,
    "embed_text": EmbedTextRequest,
    "embed_image": EmbedImageRequest,
    "embed_video": EmbedVideoRequest,
    "vqa": VqaRequest,
    "integrate": IntegrateRequest,
    "vtg": VtgRequest,
    "judge": JudgeRequest,
}

RESPONSE_TYPES: dict[str, Type[BaseModel]] = {
    "caption": CaptionResponse,
    "prompts": PromptsResponse,
    "embed_text": EmbedVectorsResponse,
    "embed_image": EmbedVectorsResponse,
    "embed_video": EmbedClipsResponse,
    "vqa": VqaResponse,
    "integrate": IntegrateResponse,
    "vtg": VtgResponse,
    "judge": JudgeResponse,
}


def role_path(role: str) -> str:
    """URL path for a role, e.g. ``/v1/embed_text``."""
    if role not in ROLES:
        raise KeyError(f"unknown role {role!r}")
    return f"/v1/{role}"


def canonical_json(payload: BaseModel | dict[str, Any]) -> bytes:
    """Canonical byte form: sorted keys, minimal separators, UTF-8."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def parse_request(role: str, data: bytes | str | dict) -> BaseModel:
    model = REQUEST_TYPES[role]
    if isinstance(data, dict):
        return model.model_validate(data)
    return model.model_validate_json(data)


def parse_response(role: str, data: bytes | str | dict) -> BaseModel:
    model = RESPONSE_TYPES[role]
    if isinstance(data, dict):
        return model.model_validate(data)
    return model.model_validate_json(data)


def fingerprint(role: str, request: BaseModel | dict[str, Any]) -> str:
    """Stable request identity used by scripted mock rule tables."""
    digest = hashlib.sha256(role.encode() + b"\x00" + canonical_json(request))
    return digest.hexdigest()
