"""Request/response models of the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, model_validator

from ..config import ResultRecord, RunConfig

__all__ = ["RunRequest", "RunResponse", "ValidateRequest", "PresetInfo", "HealthResponse"]


class RunRequest(BaseModel):
    """A run is specified either inline or by preset name (with overrides applied on top)."""

    config: Optional[RunConfig] = None
    preset: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self) -> "RunRequest":
        if self.config is None and self.preset is None:
            raise ValueError("provide either config or preset")
        return self


class RunResponse(BaseModel):
    record: ResultRecord
    artifacts: dict[str, str]


class ValidateRequest(BaseModel):
    seed: int = 0


class PresetInfo(BaseModel):
    name: str
    kind: str
    config: RunConfig


class HealthResponse(BaseModel):
    status: str
    version: str
