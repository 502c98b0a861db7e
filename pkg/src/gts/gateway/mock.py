"""Deterministic in-process mock backends serving the wire protocol.

A mock is a real FastAPI app: the same pipeline code drives it through an
in-process HTTP client or over a socket, byte-compatible with production
backends. Responses come from an ordered rule table (first match wins) and
fall back to seeded deterministic synthesis; roles listed in
``strict_roles`` fail loudly on unscripted requests instead.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from .. import taxonomy
from .client import BackendEndpoint, GatewayClient
from .protocol import ROLES, fingerprint, parse_request, parse_response, role_path

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

MOCK_BASE_URL = "http://mock.gts.local"

_VTG_SPAN_RE = re.compile(r"frames?\s+(\d+)\s*(?:to|and|-|–|through)\s*(\d+)", re.IGNORECASE)


@dataclass(frozen=True)
class MockRule:
    """Scripted response served when ``match`` covers the request.

    Keys in ``match`` compare for equality against the request payload; a
    trailing ``~`` switches a key to containment (substring for strings, any
    containing element for lists), which keeps scripts stable when e.g.
    sampled frame lists vary between configurations.
    """

    role: str
    match: dict[str, Any]
    response: dict[str, Any]

    def matches(self, payload: dict[str, Any]) -> bool:
        for key, expected in self.match.items():
            if key.endswith("~"):
                value = payload.get(key[:-1])
                if isinstance(value, str):
                    if str(expected) not in value:
                        return False
                elif isinstance(value, list):
                    if not any(str(expected) in str(item) for item in value):
                        return False
                else:
                    return False
            else:
                if payload.get(key) != expected:
                    return False
        return True


def load_rules(path: str | Path) -> list[MockRule]:
    """Read a JSON rule table: a list of {role, match, response} objects."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [MockRule(role=r["role"], match=r.get("match", {}), response=r["response"]) for r in raw]


class MockBackend:
    """Scripted, seeded implementation of all nine wire endpoints."""

    def __init__(
        self,
        seed: int = 0,
        rules: Iterable[MockRule] = (),
        *,
        embed_dim: int = 32,
        strict_roles: frozenset[str] | set[str] = frozenset(),
    ):
        self.seed = seed
        self.rules = list(rules)
        self.embed_dim = embed_dim
        self.strict_roles = frozenset(strict_roles)
        self.call_log: list[tuple[str, dict[str, Any]]] = []
        self._log_lock = threading.Lock()
        self._app: FastAPI | None = None
        self._test_client: TestClient | None = None

    # ------------------------------------------------------------------ app

    @property
    def app(self) -> FastAPI:
        if self._app is None:
            self._app = self._build_app()
        return self._app

    def _build_app(self) -> FastAPI:
        app = FastAPI(title="gts mock backend")

        @app.exception_handler(RequestValidationError)
        async def _invalid(request: Request, exc: RequestValidationError):
            return JSONResponse(
                status_code=422,
                content={"error": "validation_error", "detail": str(exc.errors())},
            )

        @app.get("/healthz")
        def healthz():
            return {"ok": True}

        def register(role: str):
            async def handler(request: Request):
                body = await request.body()
                try:
                    message = parse_request(role, body)
                except (ValidationError, ValueError) as exc:
                    return JSONResponse(
                        status_code=422,
                        content={"error": "validation_error", "detail": str(exc)},
                    )
                payload = message.model_dump(mode="json")
                with self._log_lock:
                    self.call_log.append((role, payload))
                for rule in self.rules:
                    if rule.role == role and rule.matches(payload):
                        return JSONResponse(self._validated(role, rule.response))
                if role in self.strict_roles:
                    return JSONResponse(
                        status_code=501,
                        content={
                            "error": "scripted_miss",
                            "detail": f"{role}: no rule matched request {fingerprint(role, payload)}",
                        },
                    )
                return JSONResponse(self._validated(role, self._synthesize(role, payload)))

            app.post(role_path(role))(handler)

        for role in ROLES:
            register(role)
        return app

    @staticmethod
    def _validated(role: str, response: dict[str, Any]) -> dict[str, Any]:
        return parse_response(role, response).model_dump(mode="json")

    # -------------------------------------------------------------- clients

    def client(self, role: str, **endpoint_overrides) -> GatewayClient:
        """In-process gateway client bound to this mock."""
        if self._test_client is None:
            self._test_client = TestClient(self.app, base_url=MOCK_BASE_URL)
        return GatewayClient(self.endpoint(role, **endpoint_overrides), http=self._test_client)

    def endpoint(self, role: str, **overrides) -> BackendEndpoint:
        return BackendEndpoint(role=role, base_url=MOCK_BASE_URL, **overrides)

    def calls(self, role: str) -> list[dict[str, Any]]:
        with self._log_lock:
            return [payload for r, payload in self.call_log if r == role]

    # ----------------------------------------------------------- synthesis

    def _rng(self, *parts: str) -> np.random.Generator:
        material = "\x1f".join((str(self.seed),) + parts)
        digest = hashlib.sha256(material.encode("utf-8")).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "little"))

    def _unit_vector(self, *parts: str) -> list[float]:
        vec = self._rng(*parts).standard_normal(self.embed_dim)
        vec /= np.linalg.norm(vec)
        return vec.tolist()

    def _token(self, *parts: str) -> str:
        material = "\x1f".join((str(self.seed),) + parts)
        return hashlib.sha256(material.encode("utf-8")).hexdigest()[:8]

    def _synthesize(self, role: str, payload: dict[str, Any]) -> dict[str, Any]:
        if role == "caption":
            token = self._token("caption", payload["video_id"])
            return {"caption": f"Scene {token}: ordinary activity in view."}
        if role == "prompts":
            words = [w.strip(".,:;") for w in payload["caption"].split() if len(w) > 3]
            static = list(dict.fromkeys(words[:3])) or ["the scene"]
            return {"static": static, "dynamic": ["ongoing activity", "sudden movement"]}
        if role == "embed_text":
            vectors = [self._unit_vector("text", payload["kind"], t) for t in payload["texts"]]
            return {"dim": self.embed_dim, "vectors": vectors}
        if role == "embed_image":
            vectors = [self._unit_vector("image", ref) for ref in payload["frame_refs"]]
            return {"dim": self.embed_dim, "vectors": vectors}
        if role == "embed_video":
            refs = payload["frame_refs"]
            stride, window = payload["stride"], payload["window"]
            starts = list(range(0, len(refs), stride))
            vectors = [
                self._unit_vector("clip", *refs[s : s + window]) for s in starts
            ]
            return {"dim": self.embed_dim, "clip_starts": starts, "vectors": vectors}
        if role == "vqa":
            return {"answer": "Nothing unusual is visible in these frames."}
        if role == "integrate":
            return self._integrate(payload)
        if role == "vtg":
            return self._vtg(payload)
        if role == "judge":
            return self._judge(payload)
        raise KeyError(role)

    @staticmethod
    def _integrate(payload: dict[str, Any]) -> dict[str, Any]:
        unique: list[str] = []
        for text in payload["segment_reports"]:
            if text not in unique:
                unique.append(text)
        joined = " ".join(unique)
        lowered = joined.lower()
        category = taxonomy.NORMAL
        for name in payload["anomaly_list"] or taxonomy.CATEGORIES:
            if name.lower() in lowered:
                category = name
                break
        return {"report": joined, "category": category}

    @staticmethod
    def _vtg(payload: dict[str, Any]) -> dict[str, Any]:
        match = _VTG_SPAN_RE.search(payload["query"])
        if match:
            return {"start_frame": int(match.group(1)), "end_frame": int(match.group(2))}
        return {"start_frame": 0, "end_frame": len(payload["frame_refs"])}

    @staticmethod
    def _judge(payload: dict[str, Any]) -> dict[str, Any]:
        prediction, reference = payload["prediction"], payload["reference"]
        if prediction == reference:
            score, rationale = 10, "prediction matches the reference exactly"
        else:
            pred_words = set(prediction.lower().split())
            ref_words = set(reference.lower().split())
            union = pred_words | ref_words
            jaccard = len(pred_words & ref_words) / len(union) if union else 0.0
            score = max(1, min(10, 1 + round(9 * jaccard)))
            rationale = f"word overlap {jaccard:.3f}"
        return {
            "subject": score,
            "scene": score,
            "course_of_events": score,
            "impact": score,
            "rationale": rationale,
        }


__all__ = ["MockBackend", "MockRule", "load_rules", "MOCK_BASE_URL"]
