"""Sidecar conformance against the primary client's suite, plus shim behavior."""

from __future__ import annotations

import socket
import threading
import time
import warnings

import numpy as np
import pytest
from PIL import Image

from gts_sidecar.app import create_app
from gts_sidecar.config import SidecarConfig
from gts_sidecar.features import locate_salient_span

# The conformance suite ships with the primary package and runs unchanged
# against any backend implementation.
from gts.gateway.conformance import HttpConformanceTarget, assert_conformance, run_conformance

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient


@pytest.fixture(scope="session")
def frame_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("frames")
    video = root / "clip-a"
    video.mkdir()
    for t in range(40):
        base = 70 if not 15 <= t < 25 else 225  # bright event in the middle
        pixels = np.full((24, 24, 3), base, dtype=np.uint8)
        pixels[4:12, 4:12] = (base // 2, base // 3, min(255, base + 20))
        Image.fromarray(pixels, "RGB").save(video / f"{t:06d}.png")
    return root


@pytest.fixture(scope="session")
def app(frame_root):
    return create_app(SidecarConfig(frame_root=str(frame_root)))


@pytest.fixture()
def client(app):
    return TestClient(app)


def refs(n: int = 40) -> list[str]:
    return [f"clip-a/{t:06d}.png" for t in range(n)]


class TestConformance:
    def test_primary_conformance_suite_passes_unchanged(self, client):
        assert_conformance(HttpConformanceTarget(client), refs(6))

    def test_conformance_over_real_socket(self, app):
        import httpx
        import uvicorn

        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        )
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        deadline = time.time() + 10
        while not server.started:
            assert time.time() < deadline, "server did not start"
            time.sleep(0.05)
        try:
            with httpx.Client(base_url=f"http://127.0.0.1:{port}", timeout=30.0) as http:
                checks = run_conformance(HttpConformanceTarget(http), refs(6))
            failed = [c for c in checks if not c.ok]
            assert not failed, failed
        finally:
            server.should_exit = True
            thread.join(timeout=10)


class TestEndpoints:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200 and response.json() == {"ok": True}

    def test_identical_image_cosine(self, client):
        body = {"frame_refs": [refs()[0], refs()[0]]}
        vectors = client.post("/v1/embed_image", json=body).json()["vectors"]
        a, b = np.asarray(vectors[0]), np.asarray(vectors[1])
        assert float(a @ b) >= 1.0 - 1e-5

    def test_embedding_determinism(self, client):
        body = {"frame_refs": refs(5)}
        first = client.post("/v1/embed_image", json=body).json()["vectors"]
        second = client.post("/v1/embed_image", json=body).json()["vectors"]
        assert float(np.max(np.abs(np.asarray(first) - np.asarray(second)))) <= 1e-5

    def test_distinct_frames_distinct_vectors(self, client):
        body = {"frame_refs": [refs()[0], refs()[20]]}  # dim vs bright frame
        vectors = client.post("/v1/embed_image", json=body).json()["vectors"]
        a, b = np.asarray(vectors[0]), np.asarray(vectors[1])
        assert float(a @ b) < 1.0 - 1e-4

    def test_path_escape_rejected(self, client):
        response = client.post("/v1/embed_image", json={"frame_refs": ["../../etc/passwd"]})
        assert response.status_code == 400
        body = response.json()
        assert body["error"] == "invalid_ref" and "detail" in body

    def test_missing_frame_is_404(self, client):
        response = client.post("/v1/embed_image", json={"frame_refs": ["clip-a/999999.png"]})
        assert response.status_code == 404
        assert set(response.json()) == {"error", "detail"}

    def test_clip_pooling_grid(self, client):
        body = {"frame_refs": refs(10), "window": 4, "stride": 3}
        payload = client.post("/v1/embed_video", json=body).json()
        assert payload["clip_starts"] == [0, 3, 6, 9]
        norms = np.linalg.norm(np.asarray(payload["vectors"]), axis=1)
        assert float(np.max(np.abs(norms - 1.0))) <= 1e-5

    def test_vtg_locates_bright_event(self, client):
        payload = client.post(
            "/v1/vtg", json={"frame_refs": refs(), "query": "the bright flash"}
        ).json()
        start, end = payload["start_frame"], payload["end_frame"]
        assert 10 <= start <= 15 < 25 <= end <= 30

    def test_judge_exact_match(self, client):
        payload = client.post(
            "/v1/judge", json={"prediction": "same", "reference": "same"}
        ).json()
        assert payload["subject"] == payload["impact"] == 10

    def test_validation_error_shape(self, client):
        response = client.post("/v1/caption", json={"video_id": "x"})
        assert response.status_code == 422
        assert set(response.json()) == {"error", "detail"}


def test_salient_span_helper():
    flat = [10.0] * 30
    assert locate_salient_span(flat) == (0, 30)
    bumped = [10.0] * 10 + [200.0] * 5 + [10.0] * 15
    assert locate_salient_span(bumped) == (10, 15)


def test_pipeline_runs_against_sidecar(client, frame_root):
    """The same pipeline code that drives mocks runs against the sidecar."""
    from gts.gateway.client import BackendEndpoint, GatewayClient
    from gts.glance import BackendEmbeddingSource
    from gts.scrutinize import PipelineBackends, PipelineSettings, run_pipeline
    from gts.taxonomy import ALL_LABELS

    def bind(role: str) -> GatewayClient:
        return GatewayClient(
            BackendEndpoint(role=role, base_url="http://testserver", max_retries=0),
            http=client,
        )

    backends = PipelineBackends(
        caption=bind("caption"),
        prompts=bind("prompts"),
        vqa=bind("vqa"),
        integrate=bind("integrate"),
        vtg=bind("vtg"),
        embeddings=BackendEmbeddingSource(
            bind("embed_text"), bind("embed_image"), bind("embed_video"),
            clip_window=8, clip_stride=4,
        ),
    )
    outcome = run_pipeline("clip-a", refs(), backends, PipelineSettings(n_frames=4))
    assert outcome.report.category in ALL_LABELS
    assert outcome.report.per_segment
    assert outcome.report.description
