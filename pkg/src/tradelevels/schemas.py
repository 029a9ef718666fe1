"""Request and response models for the HTTP service."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class ParamsMixin(BaseModel):
    """Shared model constants; the coupling may come as lambda or delta."""

    model_config = ConfigDict(populate_by_name=True)

    h: float = Field(1.0, gt=0)
    alpha: float = Field(1.0, gt=0)
    lam: Optional[float] = Field(None, alias="lambda")
    delta: Optional[float] = None


class LevelsRequest(ParamsMixin):
    n_max: int = Field(..., ge=0, le=60)
    method: Literal["cubic", "numeric"] = "cubic"


class LevelRow(BaseModel):
    n: int
    omega: Optional[float] = None
    e_bar: Optional[float] = None
    status: str = "ok"
    cubic_omega: Optional[float] = None
    cubic_rel_dev: Optional[float] = None


class LevelsResponse(BaseModel):
    method: str
    h: float
    alpha: float
    lam: float
    delta: float
    levels: list[LevelRow]


class GridSpecModel(BaseModel):
    start: float
    stop: float
    n_points: int = Field(..., ge=3)


class DensityRequest(ParamsMixin):
    n: Optional[int] = Field(None, ge=0)
    levels: Optional[list[int]] = None
    weights: Optional[list[float]] = None
    grid: Optional[GridSpecModel] = None


class DensityResponse(BaseModel):
    h: float
    alpha: float
    lam: float
    delta: float
    levels: list[int]
    weights: list[float]
    r: list[float]
    f: list[float]
    mode_count: int
    integral: float


class DipRequest(BaseModel):
    values: list[float]
    n_boot: int = Field(100, ge=1)
    seed: int = Field(0, ge=0)


class DipResponse(BaseModel):
    statistic: float
    p_value: float
    n: int
    n_boot: int
    seed: int


class DetectConfigModel(BaseModel):
    start_fraction: float = 0.05
    step_fraction: float = 0.05
    n_boot: int = 100
    alpha_sig: float = 0.05
    min_subset_days: int = 22
    seed: int = Field(0, ge=0)


class DetectRequest(BaseModel):
    csv: str
    config: DetectConfigModel = DetectConfigModel()
    min_eligible_days: int = Field(972, ge=1)


class TraceStepModel(BaseModel):
    threshold: float
    subset_size: int
    dip: float
    p_value: float


class DetectResponse(BaseModel):
    e0: Optional[float]
    eta: Optional[float]
    eta_text: str
    flagged: bool
    v_max: float
    v_min: float
    n_records: int
    config: DetectConfigModel
    trace: list[TraceStepModel]


class SynthRequest(ParamsMixin):
    low: int = Field(0, ge=0)
    high: int = Field(1, ge=0)
    threshold_pct: float = Field(60.0, gt=0, lt=100)
    days: int = Field(2000, ge=0)
    seed: int = Field(0, ge=0)


class SynthResponse(BaseModel):
    csv: str
    days: int
    planted_threshold: Optional[float]


class HealthResponse(BaseModel):
    status: str
    version: str
