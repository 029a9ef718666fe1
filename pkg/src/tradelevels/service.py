"""HTTP service exposing level spectra, densities, and detection.

Domain errors map to 400 responses with ``detail.kind == "domain"``,
input-file problems to ``detail.kind == "parse"``; clients key exit codes
off that field.
"""
from __future__ import annotations

import io
import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .errors import CsvParseError, DomainError, LevelBreakdownError
from .modality import modality_pvalue
from .oscillator import (
    DensityGrid,
    ModelParams,
    anharmonic_level,
    count_modes,
    default_density_spec,
    density_from_state,
    harmonic_density,
    harmonic_level,
    mixture_density,
    numeric_spectrum,
)
from .pipeline import (
    DetectionConfig,
    bars_from_records,
    bars_to_csv,
    compute_returns,
    detect_ground_level,
    eligible,
    load_bars,
    planted_threshold,
    synthesize_market,
)
from .spectral import GridSpec
from . import schemas

app = FastAPI(title="tradelevels", version=__version__)


@app.exception_handler(CsvParseError)
async def _parse_error(request: Request, exc: CsvParseError):
    return JSONResponse(status_code=400,
                        content={"detail": {"kind": "parse", "message": str(exc)}})


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError):
    return JSONResponse(status_code=400,
                        content={"detail": {"kind": "domain", "message": str(exc)}})


def _resolve_params(req: schemas.ParamsMixin) -> tuple[ModelParams, float]:
    """Build model params from a request; returns (params, lam).

    The quartic coupling may be given as ``lambda`` (scaled) or ``delta``
    (raw); both at once is ambiguous and rejected.
    """
    if req.lam is not None and req.delta is not None:
        raise DomainError("give either lambda or delta, not both")
    base = ModelParams(h=req.h, alpha=req.alpha)
    if req.delta is not None:
        params = ModelParams(h=req.h, alpha=req.alpha, delta=req.delta)
        return params, params.lam
    lam = req.lam if req.lam is not None else 0.0
    params = ModelParams(h=req.h, alpha=req.alpha, delta=base.delta_for_lam(lam))
    return params, lam


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/levels", response_model=schemas.LevelsResponse)
def levels(req: schemas.LevelsRequest) -> schemas.LevelsResponse:
    params, lam = _resolve_params(req)
    rows: list[schemas.LevelRow] = []
    if req.method == "cubic":
        for n in range(req.n_max + 1):
            try:
                if lam == 0.0:
                    level = harmonic_level(n, ModelParams(h=req.h, alpha=req.alpha))
                else:
                    level = anharmonic_level(n, lam, params)
                rows.append(schemas.LevelRow(n=n, omega=level.omega,
                                             e_bar=level.e_bar))
            except LevelBreakdownError:
                rows.append(schemas.LevelRow(n=n, status="breakdown"))
    else:
        states = numeric_spectrum(lam, req.n_max)
        scale = 0.5 * math.sqrt(params.alpha * params.h)
        for state in states:
            row = schemas.LevelRow(n=state.n, omega=state.omega,
                                   e_bar=scale * state.omega,
                                   status="ok" if state.physical else "nonphysical")
            try:
                cubic = anharmonic_level(state.n, lam, params)
                row.cubic_omega = cubic.omega
                row.cubic_rel_dev = abs(cubic.omega - state.omega) / abs(state.omega)
            except LevelBreakdownError:
                pass
            rows.append(row)
    return schemas.LevelsResponse(method=req.method, h=req.h, alpha=req.alpha,
                                  lam=lam, delta=params.delta, levels=rows)


def _request_densities(levels: list[int], lam: float, params: ModelParams,
                       grid: schemas.GridSpecModel | None) -> list[DensityGrid]:
    spec = None
    if grid is not None:
        spec = GridSpec(grid.start, grid.stop, grid.n_points)
        if spec.start != -spec.stop:
            raise DomainError("density grid must be symmetric about 0")
    if lam == 0.0:
        harmonic = ModelParams(h=params.h, alpha=params.alpha)
        if spec is None and len(levels) > 1:
            spec = default_density_spec(max(levels), harmonic)
        return [harmonic_density(n, harmonic, grid=spec) for n in levels]
    kwargs = {}
    if spec is not None:
        kwargs = {"xi_max": spec.stop / params.length_scale,
                  "n_points": spec.n_points}
    states = numeric_spectrum(lam, max(levels), **kwargs)
    return [density_from_state(states[n], params) for n in levels]


@app.post("/density", response_model=schemas.DensityResponse)
def density(req: schemas.DensityRequest) -> schemas.DensityResponse:
    params, lam = _resolve_params(req)
    if (req.n is None) == (req.levels is None):
        raise DomainError("give either n or levels (with weights)")
    if req.n is not None:
        level_ids = [req.n]
        weights = [1.0]
    else:
        level_ids = list(req.levels or [])
        if not level_ids:
            raise DomainError("levels must be non-empty")
        if req.weights is None or len(req.weights) != len(level_ids):
            raise DomainError("weights must match levels one for one")
        weights = list(req.weights)
    parts = _request_densities(level_ids, lam, params, req.grid)
    mixed = mixture_density(weights, parts) if len(parts) > 1 else parts[0]
    integral = float(np.trapezoid(mixed.f, dx=mixed.dr))
    return schemas.DensityResponse(
        h=req.h, alpha=req.alpha, lam=lam, delta=params.delta,
        levels=level_ids, weights=weights,
        r=mixed.r.tolist(), f=mixed.f.tolist(),
        mode_count=count_modes(mixed), integral=integral)


@app.post("/dip", response_model=schemas.DipResponse)
def dip(req: schemas.DipRequest) -> schemas.DipResponse:
    verdict = modality_pvalue(req.values, n_boot=req.n_boot, seed=req.seed)
    return schemas.DipResponse(statistic=verdict.statistic, p_value=verdict.p_value,
                               n=len(req.values), n_boot=verdict.n_boot,
                               seed=verdict.seed)


@app.post("/detect", response_model=schemas.DetectResponse)
def detect(req: schemas.DetectRequest) -> schemas.DetectResponse:
    bars = load_bars(io.StringIO(req.csv))
    records = compute_returns(bars)
    if not eligible(records, min_days=req.min_eligible_days):
        raise DomainError(
            f"series not eligible: {len(records)} trading days "
            f"< required {req.min_eligible_days}")
    config = DetectionConfig(start_fraction=req.config.start_fraction,
                             step_fraction=req.config.step_fraction,
                             n_boot=req.config.n_boot,
                             alpha_sig=req.config.alpha_sig,
                             min_subset_days=req.config.min_subset_days,
                             seed=req.config.seed)
    result = detect_ground_level(records, config)
    return schemas.DetectResponse(
        e0=result.e0, eta=result.eta, eta_text=result.eta_text,
        flagged=result.flagged, v_max=result.v_max, v_min=result.v_min,
        n_records=result.n_records, config=req.config,
        trace=[schemas.TraceStepModel(threshold=t.threshold,
                                      subset_size=t.subset_size,
                                      dip=t.dip, p_value=t.p_value)
               for t in result.trace])


@app.post("/synth", response_model=schemas.SynthResponse)
def synth(req: schemas.SynthRequest) -> schemas.SynthResponse:
    params, lam = _resolve_params(req)
    if lam != 0.0:
        raise DomainError("synthetic markets use the harmonic branch; "
                          "lambda and delta must be 0")
    records = synthesize_market(params, low_level=req.low, high_level=req.high,
                                threshold_percentile=req.threshold_pct,
                                n_days=req.days, seed=req.seed)
    planted = None
    if req.days > 0:
        planted = planted_threshold(params, threshold_percentile=req.threshold_pct,
                                    n_days=req.days, seed=req.seed)
    return schemas.SynthResponse(csv=bars_to_csv(bars_from_records(records)),
                                 days=req.days, planted_threshold=planted)
