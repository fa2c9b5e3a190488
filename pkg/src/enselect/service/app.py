"""FastAPI application wrapping the experiment harness.

Each endpoint validates its request, delegates to the corresponding
harness runner, and returns the artifacts as named text files. Domain
errors map to stable HTTP statuses carrying a machine-readable ``kind``
(config -> 422, data -> 400, resource -> 413) that the CLI translates
into exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ConfigError, DatasetFormatError, ResourceLimitError
from ..harness import (
    DatasetSource,
    ExperimentConfig,
    SampleConfig,
    SaturationConfig,
    ValidationConfig,
    error_curve_artifacts,
    fit_copula_artifacts,
    run_copula_validation,
    run_saturation,
    sample_artifacts,
)
from .schemas import (
    ArtifactsResponse,
    CurveRequest,
    FitCopulaRequest,
    HealthResponse,
    SampleRequest,
    SaturationRequest,
    ValidationRequest,
)

_ERROR_STATUS = {
    "config": 422,
    "data": 400,
    "resource": 413,
}


def create_app() -> FastAPI:
    app = FastAPI(
        title="enselect",
        version=__version__,
        description="Budgeted ensemble selection for correlated binary classifiers",
    )

    def _error_response(kind: str, exc: Exception) -> JSONResponse:
        return JSONResponse(
            status_code=_ERROR_STATUS[kind],
            content={"kind": kind, "message": str(exc)},
        )

    @app.exception_handler(ConfigError)
    async def _config_error(_: Request, exc: ConfigError):
        return _error_response("config", exc)

    @app.exception_handler(DatasetFormatError)
    async def _data_error(_: Request, exc: DatasetFormatError):
        return _error_response("data", exc)

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(_: Request, exc: FileNotFoundError):
        return _error_response("data", exc)

    @app.exception_handler(ResourceLimitError)
    async def _resource_error(_: Request, exc: ResourceLimitError):
        return _error_response("resource", exc)

    @app.exception_handler(ValueError)
    async def _value_error(_: Request, exc: ValueError):
        # Domain validation that surfaced below the config layer.
        return _error_response("config", exc)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(version=__version__)

    @app.post("/experiments/curve", response_model=ArtifactsResponse)
    def curve(request: CurveRequest) -> ArtifactsResponse:
        config = ExperimentConfig.from_dict(request.to_payload())
        return ArtifactsResponse.from_mapping(error_curve_artifacts(config))

    @app.post("/copula/validate", response_model=ArtifactsResponse)
    def validate_copula(request: ValidationRequest) -> ArtifactsResponse:
        config = ValidationConfig.from_dict(request.to_payload())
        return ArtifactsResponse.from_mapping(run_copula_validation(config))

    @app.post("/copula/fit", response_model=ArtifactsResponse)
    def fit_copula(request: FitCopulaRequest) -> ArtifactsResponse:
        source = DatasetSource.from_dict(request.to_payload()["dataset"])
        return ArtifactsResponse.from_mapping(fit_copula_artifacts(source, request.seed))

    @app.post("/copula/sample", response_model=ArtifactsResponse)
    def sample(request: SampleRequest) -> ArtifactsResponse:
        config = SampleConfig.from_dict(request.to_payload())
        return ArtifactsResponse.from_mapping(sample_artifacts(config))

    @app.post("/saturation", response_model=ArtifactsResponse)
    def saturate(request: SaturationRequest) -> ArtifactsResponse:
        config = SaturationConfig.from_dict(request.to_payload())
        return ArtifactsResponse.from_mapping(run_saturation(config))

    return app


app = create_app()
