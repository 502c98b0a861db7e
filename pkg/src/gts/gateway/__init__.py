"""JSON-over-HTTP gateway to the model backends, plus deterministic mocks."""

from .client import BackendEndpoint, GatewayClient, call
from .protocol import (
    ROLES,
    CaptionRequest,
    CaptionResponse,
    EmbedImageRequest,
    EmbedTextRequest,
    EmbedVideoRequest,
    EmbedClipsResponse,
    EmbedVectorsResponse,
    ErrorBody,
    IntegrateRequest,
    IntegrateResponse,
    JudgeRequest,
    JudgeResponse,
    PromptsRequest,
    PromptsResponse,
    VqaRequest,
    VqaResponse,
    VtgRequest,
    VtgResponse,
    canonical_json,
    parse_request,
    parse_response,
    role_path,
)
from .mock import MockBackend, MockRule, load_rules

__all__ = [
    "BackendEndpoint",
    "GatewayClient",
    "call",
    "ROLES",
    "CaptionRequest",
    "CaptionResponse",
    "PromptsRequest",
    "PromptsResponse",
    "EmbedTextRequest",
    "EmbedImageRequest",
    "EmbedVideoRequest",
    "EmbedVectorsResponse",
    "EmbedClipsResponse",
    "VqaRequest",
    "VqaResponse",
    "IntegrateRequest",
    "IntegrateResponse",
    "VtgRequest",
    "VtgResponse",
    "JudgeRequest",
    "JudgeResponse",
    "ErrorBody",
    "canonical_json",
    "parse_request",
    "parse_response",
    "role_path",
    "MockBackend",
    "MockRule",
    "load_rules",
]
