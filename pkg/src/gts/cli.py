"""Thin command-line client for the benchmark service.

Every subcommand builds a typed request and posts it to the service API;
without ``--server`` the service app is mounted in-process, so the CLI works
standalone while exercising the exact HTTP surface a remote deployment
serves. Exit codes: 0 success, 2 partial/data failures, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
import warnings
from typing import Any

import httpx
from pydantic import BaseModel

from .bench import runner
from .bench.config import load_config
from .errors import UsageError
from .service.app import create_app
from .service import schemas

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_USAGE = 64


class ServiceClient:
    """POSTs typed requests to a remote service or an in-process app."""

    def __init__(self, server: str | None):
        if server:
            self._http = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
            self.in_process = False
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient
            self._http = TestClient(create_app())
            self.in_process = True

    def post(self, path: str, payload: BaseModel) -> tuple[int, dict[str, Any]]:
        response = self._http.post(
            path,
            content=payload.model_dump_json().encode("utf-8"),
            headers={"content-type": "application/json"},
        )
        try:
            body = response.json()
        except ValueError:
            body = {"error": "bad_response", "detail": response.text[:500]}
        return response.status_code, body

    def close(self) -> None:
        self._http.close()


def _apply_overrides(args: argparse.Namespace, config):
    updates: dict[str, Any] = {}
    if getattr(args, "mock", False):
        updates["mock"] = config.mock.model_copy(update={"enabled": True})
    if getattr(args, "workers", None):
        updates["workers"] = args.workers
    if getattr(args, "run_id", None):
        updates["run_id"] = args.run_id
    return config.model_copy(update=updates) if updates else config


def _fail(body: dict[str, Any]) -> int:
    print(f"error: {body.get('error', '?')}: {body.get('detail', '')}", file=sys.stderr)
    return EXIT_USAGE


def _install_graceful_stop(client: ServiceClient) -> None:
    if not client.in_process:
        return
    runner.GLOBAL_STOP.clear()

    def handler(signum, frame):
        print("stop requested; finishing in-flight videos...", file=sys.stderr)
        runner.GLOBAL_STOP.set()

    try:
        signal.signal(signal.SIGINT, handler)
    except ValueError:
        pass  # not the main thread; leave default handling in place


def cmd_run(args: argparse.Namespace) -> int:
    config = _apply_overrides(args, load_config(args.config))
    client = ServiceClient(args.server)
    _install_graceful_stop(client)
    status, body = client.post("/api/v1/run", schemas.RunRequest(config=config))
    if status != 200:
        return _fail(body)
    response = schemas.RunResponse.model_validate(body)
    summary = response.summary
    print(f"run {response.run_id}: {len(summary.completed)}/{len(summary.video_ids)} videos ok")
    for failure in summary.failures:
        print(f"  failed {failure.video_id} [{failure.stage}]: {failure.error}", file=sys.stderr)
    print(f"records: {response.run_dir}")
    print(f"fps: {summary.fps:.1f}")
    return response.exit_code


def cmd_eval(args: argparse.Namespace) -> int:
    config = _apply_overrides(args, load_config(args.config))
    client = ServiceClient(args.server)
    status, body = client.post(
        "/api/v1/eval", schemas.EvalRequest(config=config, run_dir=args.run_dir)
    )
    if status != 200:
        return _fail(body)
    response = schemas.EvalResponse.model_validate(body)
    print(response.table_text)
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    config = _apply_overrides(args, load_config(args.config))
    variants = None
    if args.variants:
        variants = json.loads(open(args.variants, encoding="utf-8").read())
    client = ServiceClient(args.server)
    status, body = client.post(
        "/api/v1/ablate", schemas.AblateRequest(config=config, variants=variants)
    )
    if status != 200:
        return _fail(body)
    response = schemas.AblateResponse.model_validate(body)
    print(response.table_text)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if not args.annotations and not args.config:
        print("error: provide --annotations or --config", file=sys.stderr)
        return EXIT_USAGE
    annotations_path = args.annotations or load_config(args.config).dataset.annotations
    client = ServiceClient(args.server)
    status, body = client.post(
        "/api/v1/validate", schemas.ValidateRequest(annotations_path=annotations_path)
    )
    if status != 200:
        return _fail(body)
    response = schemas.ValidateResponse.model_validate(body)
    if response.ok:
        print(f"{response.count} annotation record(s) valid")
        return EXIT_OK
    for error in response.errors:
        print(error, file=sys.stderr)
    return EXIT_PARTIAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gts", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_config: bool = True):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON config file (BenchConfig shape)")
        p.add_argument("--server", help="base URL of a running service; default runs in-process")
        p.add_argument("--mock", action="store_true", help="force mock backends on")
        p.add_argument("--workers", type=int, help="override the worker limit")
        p.add_argument("--run-id", dest="run_id", help="override the run identifier")

    run_p = sub.add_parser("run", help="run the pipeline over the annotated dataset")
    common(run_p)
    run_p.set_defaults(func=cmd_run)

    eval_p = sub.add_parser("eval", help="evaluate a completed run directory")
    common(eval_p)
    eval_p.add_argument("--run-dir", required=True)
    eval_p.set_defaults(func=cmd_eval)

    ablate_p = sub.add_parser("ablate", help="run and compare ablation variants")
    common(ablate_p)
    ablate_p.add_argument("--variants", help="JSON file: {name: {flag: bool}}; default: 4 canonical")
    ablate_p.set_defaults(func=cmd_ablate)

    validate_p = sub.add_parser("validate-dataset", help="check annotation invariants")
    common(validate_p, needs_config=False)
    validate_p.add_argument("--config", help="JSON config file (BenchConfig shape)")
    validate_p.add_argument("--annotations", help="annotations JSON path")
    validate_p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
