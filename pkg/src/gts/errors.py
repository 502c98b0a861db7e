"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GtsError(Exception):
    """Base class for all package-specific errors."""


class DomainError(GtsError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class UndefinedMetricError(DomainError):
    """A metric is undefined for the given inputs (e.g. empty list, zero mean)."""


class ShapeError(GtsError, ValueError):
    """Array or vector shapes are inconsistent."""


class ConfigError(GtsError, ValueError):
    """A configuration value violates its contract."""


class UsageError(ConfigError):
    """Invalid invocation; maps to CLI exit code 64."""


class BackendError(GtsError):
    """Base class for gateway/backend failures."""


class BackendUnavailableError(BackendError):
    """Transport kept failing after the configured number of retries."""


class BackendTimeoutError(BackendError):
    """The final attempt against a backend timed out."""


class BackendRequestError(BackendError):
    """The backend answered with a non-200 status."""

    def __init__(self, status_code: int, error: str, detail: str = ""):
        super().__init__(f"backend returned {status_code}: {error}: {detail}")
        self.status_code = status_code
        self.error = error
        self.detail = detail


class ProtocolError(BackendError):
    """A response violated the wire schema; carries the raw body for diagnostics."""

    def __init__(self, message: str, raw_body: str = ""):
        super().__init__(message)
        self.raw_body = raw_body


class CategoryError(ProtocolError):
    """The integrator returned a category outside the taxonomy."""


class PromptGenerationError(GtsError):
    """The prompt generator returned empty lists."""

    def __init__(self, message: str, caption: str = ""):
        super().__init__(message)
        self.caption = caption


class PipelineStageError(GtsError):
    """A pipeline stage failed; carries partial results for diagnostics."""

    def __init__(self, stage: str, message: str, completed: list | None = None):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
        self.completed = completed or []


class AnnotationLoadError(GtsError):
    """An annotation record violated the dataset schema."""


class EmbeddingFormatError(GtsError):
    """An embedding file is malformed."""


class IngestionError(GtsError):
    """Frames could not be resolved for a video."""


class ExtractionError(IngestionError):
    """The user-supplied frame extractor command failed."""


class EvalError(GtsError):
    """Evaluation could not proceed (e.g. missing run records)."""

    def __init__(self, message: str, video_ids: list[str] | None = None):
        super().__init__(message)
        self.video_ids = video_ids or []
