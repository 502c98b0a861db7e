"""Service API routes and the thin CLI client over them."""

from __future__ import annotations

import json
import warnings

import pytest

from gts.cli import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main
from gts.service.app import create_app

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient


@pytest.fixture()
def client():
    return TestClient(create_app())


def post(client, path, payload):
    return client.post(path, json=payload)


class TestServiceApp:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200 and response.json() == {"ok": True}

    def test_run_eval_analyze_roundtrip(self, client, demo_config):
        config = demo_config.model_copy(update={"run_id": "svc"}).model_dump(mode="json")
        response = post(client, "/api/v1/run", {"config": config})
        assert response.status_code == 200, response.text
        body = response.json()
        assert body["exit_code"] == 0
        assert len(body["summary"]["completed"]) == 3

        response = post(client, "/api/v1/eval", {"config": config, "run_dir": body["run_dir"]})
        assert response.status_code == 200, response.text
        table = response.json()["table"]
        assert table["overall"]["acceptable"] is True
        assert len(table["per_category"]) == 22

        response = post(
            client, "/api/v1/analyze", {"config": config, "video_id": "street-fire"}
        )
        assert response.status_code == 200, response.text
        report = response.json()["report"]
        assert report["category"] == "Fire"
        assert report["grounded"] == {"start": 45, "end": 55}

    def test_validate_route(self, client, demo_dataset, tmp_path):
        response = post(
            client, "/api/v1/validate", {"annotations_path": str(demo_dataset.annotations_path)}
        )
        assert response.status_code == 200
        assert response.json() == {"ok": True, "count": 3, "errors": []}

        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps([{"video_id": "x"}]))
        response = post(client, "/api/v1/validate", {"annotations_path": str(bad)})
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] is False and body["errors"]

    def test_usage_error_maps_to_400(self, client, demo_config):
        config = demo_config.model_copy(update={"run_id": "clash"})
        payload = {"config": config.model_dump(mode="json")}
        assert post(client, "/api/v1/run", payload).status_code == 200
        response = post(client, "/api/v1/run", payload)
        assert response.status_code == 400
        body = response.json()
        assert body["error"] == "usage_error" and "already exists" in body["detail"]

    def test_unknown_video_analyze(self, client, demo_config):
        response = post(
            client,
            "/api/v1/analyze",
            {"config": demo_config.model_dump(mode="json"), "video_id": "ghost"},
        )
        assert response.status_code == 400

    def test_validation_error_shape(self, client):
        response = post(client, "/api/v1/run", {"not_config": 1})
        assert response.status_code == 422
        body = response.json()
        assert set(body) == {"error", "detail"}


def write_cli_config(demo_config, tmp_path) -> str:
    path = tmp_path / "cli-config.json"
    path.write_text(json.dumps(demo_config.model_dump(mode="json")))
    return str(path)


class TestCli:
    def test_run_then_eval(self, demo_config, tmp_path, capsys):
        config_path = write_cli_config(demo_config, tmp_path)
        assert main(["run", "--config", config_path, "--run-id", "cli1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "3/3 videos ok" in out
        run_dir = str(tmp_path / "runs" / "cli1")
        assert main(["eval", "--config", config_path, "--run-dir", run_dir]) == EXIT_OK
        out = capsys.readouterr().out
        assert "JeAUG" in out and "street-fire" in out

    def test_run_id_collision_exits_64(self, demo_config, tmp_path, capsys):
        config_path = write_cli_config(demo_config, tmp_path)
        assert main(["run", "--config", config_path, "--run-id", "dup"]) == EXIT_OK
        assert main(["run", "--config", config_path, "--run-id", "dup"]) == EXIT_USAGE

    def test_missing_config_file_exits_64(self, capsys):
        assert main(["run", "--config", "/nonexistent/config.json"]) == EXIT_USAGE

    def test_validate_dataset(self, demo_dataset, tmp_path, capsys):
        assert (
            main(["validate-dataset", "--annotations", str(demo_dataset.annotations_path)])
            == EXIT_OK
        )
        assert "3 annotation record(s) valid" in capsys.readouterr().out

        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps([{"video_id": "x"}]))
        assert main(["validate-dataset", "--annotations", str(bad)]) == EXIT_PARTIAL

        assert main(["validate-dataset"]) == EXIT_USAGE

    def test_ablate_cli_with_variant_file(self, demo_config, tmp_path, capsys):
        config_path = write_cli_config(
            demo_config.model_copy(update={"run_id": "cliabl"}), tmp_path
        )
        variants = tmp_path / "variants.json"
        variants.write_text(json.dumps({"again": {}}))
        assert (
            main(["ablate", "--config", config_path, "--variants", str(variants)]) == EXIT_OK
        )
        out = capsys.readouterr().out
        assert "again" in out and "0.0000" in out

    def test_mock_flag_forces_mock_mode(self, demo_config, tmp_path):
        disabled = demo_config.model_copy(
            update={"mock": demo_config.mock.model_copy(update={"enabled": False})}
        )
        config_path = write_cli_config(disabled, tmp_path)
        # without --mock: no backends bound -> usage error
        assert main(["run", "--config", config_path, "--run-id", "nm"]) == EXIT_USAGE
        assert main(["run", "--config", config_path, "--run-id", "m", "--mock"]) == EXIT_OK
