"""Pydantic request/response models for the HTTP service.

Requests mirror the JSON config schema consumed by the harness; responses
carry named text artifacts that clients write to disk verbatim, keeping
byte-level determinism end to end.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class EquicorrelatedSpecModel(BaseModel):
    m: int
    rho: float
    alpha: float


class DatasetSourceModel(BaseModel):
    """Exactly one of path/csv/equicorrelated/copula_model must be set.

    ``path`` is resolved on the machine running the service; remote
    clients should inline file contents as ``csv``.
    """

    model_config = ConfigDict(extra="forbid")

    path: str | None = None
    csv: str | None = None
    equicorrelated: EquicorrelatedSpecModel | None = None
    copula_model: dict | None = None
    n: int | None = None

    def to_payload(self) -> dict:
        return self.model_dump(exclude_none=True)


class SplitSpecModel(BaseModel):
    train_fraction: float
    seed: int | None = None
    num_splits: int = 1


class KRangeModel(BaseModel):
    min: int
    max: int


class CurveRequest(BaseModel):
    dataset: DatasetSourceModel
    methods: list[str]
    aggregators: list[str]
    k_range: list[int] | KRangeModel
    split: SplitSpecModel
    alpha: float = 1.0
    seed: int = 0
    exhaustive_cap: int = 10_000

    def to_payload(self) -> dict:
        payload = self.model_dump(exclude_none=True)
        payload["dataset"] = self.dataset.to_payload()
        split = dict(payload["split"])
        if split.get("seed") is None:
            split.pop("seed", None)
        payload["split"] = split
        return payload


class ValidationRequest(BaseModel):
    dataset: DatasetSourceModel
    n_synth: int = 200_000
    seed: int = 0

    def to_payload(self) -> dict:
        payload = self.model_dump(exclude_none=True)
        payload["dataset"] = self.dataset.to_payload()
        return payload


class SaturationRequest(BaseModel):
    rho: float
    alpha: float
    m_schedule: list[int]
    n: int = 200_000
    seed: int = 0

    def to_payload(self) -> dict:
        return self.model_dump()


class FitCopulaRequest(BaseModel):
    dataset: DatasetSourceModel
    seed: int = 0

    def to_payload(self) -> dict:
        return {"dataset": self.dataset.to_payload(), "seed": self.seed}


class SampleRequest(BaseModel):
    dataset: DatasetSourceModel
    seed: int = 0

    def to_payload(self) -> dict:
        return {"dataset": self.dataset.to_payload(), "seed": self.seed}


class ArtifactFile(BaseModel):
    name: str
    content: str


class ArtifactsResponse(BaseModel):
    artifacts: list[ArtifactFile]

    @classmethod
    def from_mapping(cls, artifacts: dict[str, str]) -> "ArtifactsResponse":
        files = [ArtifactFile(name=n, content=c) for n, c in sorted(artifacts.items())]
        return cls(artifacts=files)


class HealthResponse(BaseModel):
    status: str = Field(default="ok")
    version: str
