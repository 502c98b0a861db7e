"""Service routes: run, eval, ablate, validate, analyze, health."""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..bench.ablate import run_ablation
from ..bench.config import BenchConfig
from ..bench.evaluate import evaluate_run
from ..bench.runner import build_pipeline_backends, pipeline_settings, run_batch, run_one_video
from ..bench.tables import render_ablation, render_summary
from ..bench.config import config_fingerprint
from ..dataset.annotations import load_annotations
from ..errors import (
    AnnotationLoadError,
    BackendError,
    EvalError,
    GtsError,
    UsageError,
)
from ..gateway.client import GatewayClient
from ..gateway.mock import MockBackend, load_rules
from . import schemas

log = logging.getLogger(__name__)


def _judge_client(config: BenchConfig) -> GatewayClient:
    if config.mock.enabled:
        rules = load_rules(config.mock.rules_path) if config.mock.rules_path else []
        mock = MockBackend(seed=config.mock.seed, rules=rules, embed_dim=config.mock.embed_dim)
        return mock.client("judge")
    return GatewayClient(config.endpoint_for("judge"))


def create_app() -> FastAPI:
    app = FastAPI(title="gts benchmark service", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def _invalid(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422, content={"error": "validation_error", "detail": str(exc.errors())}
        )

    @app.exception_handler(UsageError)
    async def _usage(request: Request, exc: UsageError):
        return JSONResponse(status_code=400, content={"error": "usage_error", "detail": str(exc)})

    @app.exception_handler(AnnotationLoadError)
    async def _annotations(request: Request, exc: AnnotationLoadError):
        return JSONResponse(
            status_code=400, content={"error": "annotation_error", "detail": str(exc)}
        )

    @app.exception_handler(EvalError)
    async def _eval(request: Request, exc: EvalError):
        return JSONResponse(status_code=409, content={"error": "eval_error", "detail": str(exc)})

    @app.exception_handler(GtsError)
    async def _gts(request: Request, exc: GtsError):
        log.exception("request failed")
        return JSONResponse(
            status_code=500, content={"error": type(exc).__name__, "detail": str(exc)}
        )

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/api/v1/run", response_model=schemas.RunResponse)
    def run(request: schemas.RunRequest) -> schemas.RunResponse:
        outcome = run_batch(request.config)
        return schemas.RunResponse(
            run_id=outcome.summary.run_id,
            run_dir=str(outcome.run_dir),
            exit_code=outcome.exit_code,
            summary=outcome.summary,
        )

    @app.post("/api/v1/eval", response_model=schemas.EvalResponse)
    def eval_run(request: schemas.EvalRequest) -> schemas.EvalResponse:
        annotations = load_annotations(request.config.dataset.annotations)
        table = evaluate_run(request.run_dir, annotations, _judge_client(request.config))
        return schemas.EvalResponse(table=table, table_text=render_summary(table))

    @app.post("/api/v1/ablate", response_model=schemas.AblateResponse)
    def ablate(request: schemas.AblateRequest) -> schemas.AblateResponse:
        result = run_ablation(request.config, _judge_client(request.config), request.variants)
        return schemas.AblateResponse(result=result, table_text=render_ablation(result))

    @app.post("/api/v1/validate", response_model=schemas.ValidateResponse)
    def validate(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
        try:
            annotations = load_annotations(request.annotations_path)
        except AnnotationLoadError as exc:
            return schemas.ValidateResponse(ok=False, count=0, errors=[str(exc)])
        return schemas.ValidateResponse(ok=True, count=len(annotations))

    @app.post("/api/v1/analyze", response_model=schemas.AnalyzeResponse)
    def analyze(request: schemas.AnalyzeRequest) -> schemas.AnalyzeResponse:
        config = request.config
        annotations = load_annotations(config.dataset.annotations)
        matches = [a for a in annotations if a.video_id == request.video_id]
        if not matches:
            raise UsageError(f"video {request.video_id!r} not found in the annotations")
        backends, _ = build_pipeline_backends(config)
        settings = pipeline_settings(config)
        try:
            record = run_one_video(
                matches[0], config, backends, settings, config_fingerprint(config)
            )
        except BackendError as exc:
            raise UsageError(f"backend failure during analysis: {exc}") from exc
        return schemas.AnalyzeResponse(video_id=request.video_id, report=record.report)

    return app
