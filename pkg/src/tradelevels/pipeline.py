"""OHLCV ingestion, log returns, and ground-level detection.

The detector sweeps a volume threshold upward from a low percentile of
the observed range, each time testing the returns of the at-or-above
subset for multimodality.  The first threshold whose subset rejects
unimodality estimates the ground-level volume; if the subset shrinks
below a month of trading days first, the ground level lies above the
maximum observed volume and the normalized threshold is flagged ">1".
"""
from __future__ import annotations

import csv
import datetime
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CsvParseError, DomainError
from .modality import modality_pvalue, _check_seed
from .oscillator import DensityGrid, HARMONIC_DENSITY_MAX, ModelParams, harmonic_density

CSV_HEADER = "date,open,high,low,close,volume"

#: First synthetic trading date used by synthesize_market.
_SYNTH_EPOCH = datetime.date(2015, 1, 2)

#: Philox stream tags (second key word) for the pipeline's random draws.
_STREAM_SAMPLE = 0
_STREAM_VOLUMES = 1
_STREAM_LOW = 2
_STREAM_HIGH = 3

#: Log-volume location and scale for synthetic markets.  The scale is
#: deliberately heavy enough that the top volume percentiles sit within
#: the detector's first few range steps.
_LOG_VOLUME_MEAN = math.log(1.0e6)
_LOG_VOLUME_SIGMA = 1.25


@dataclass(frozen=True)
class DailyBar:
    """One trading day of prices and volume."""

    date: datetime.date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self):
        for name in ("open", "high", "low", "close", "volume"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite")
        if self.open <= 0.0 or self.close <= 0.0:
            raise DomainError("open and close prices must be positive")
        if not (self.low <= min(self.open, self.close)
                and max(self.open, self.close) <= self.high):
            raise DomainError("prices must satisfy low <= open,close <= high")
        if self.volume < 0.0:
            raise DomainError("volume must be >= 0")


@dataclass(frozen=True)
class ReturnRecord:
    """One trading day: date, log return (close over open), volume."""

    date: datetime.date
    r: float
    volume: float


@dataclass(frozen=True)
class DetectionConfig:
    """Threshold-sweep settings; the seed drives every bootstrap draw."""

    start_fraction: float = 0.05
    step_fraction: float = 0.05
    n_boot: int = 100
    alpha_sig: float = 0.05
    min_subset_days: int = 22
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.start_fraction < 1.0:
            raise DomainError("start_fraction must be in (0, 1)")
        if not 0.0 < self.step_fraction < 1.0:
            raise DomainError("step_fraction must be in (0, 1)")
        if self.start_fraction + self.step_fraction > 1.0:
            raise DomainError("start_fraction + step_fraction must be <= 1")
        if self.n_boot < 1:
            raise DomainError("n_boot must be >= 1")
        if not 0.0 < self.alpha_sig < 1.0:
            raise DomainError("alpha_sig must be in (0, 1)")
        if self.min_subset_days < 4:
            raise DomainError("min_subset_days must be >= 4")
        _check_seed(self.seed)


@dataclass(frozen=True)
class TraceStep:
    """One tested threshold: split point, subset size, dip, p-value."""

    threshold: float
    subset_size: int
    dip: float
    p_value: float


@dataclass(frozen=True)
class DetectionResult:
    """Sweep outcome.  ``e0 is None`` means the ground level exceeds v_max."""

    e0: float | None
    eta: float | None
    v_max: float
    v_min: float
    n_records: int
    config: DetectionConfig
    trace: tuple[TraceStep, ...] = field(default_factory=tuple)

    @property
    def flagged(self) -> bool:
        return self.e0 is None

    @property
    def eta_text(self) -> str:
        return ">1" if self.flagged else repr(self.eta)


def _parse_float(text: str, name: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise CsvParseError(f"field {name!r} is not a number: {text!r}", line) from None


def load_bars(source) -> list[DailyBar]:
    """Parse OHLCV bars from a CSV path, text stream, or bytes.

    The header must be exactly ``date,open,high,low,close,volume`` with
    ISO dates and plain decimal numbers.  Structural problems raise
    ``CsvParseError`` with the offending 1-based line; value problems
    (non-positive prices, price ordering, duplicate dates) raise
    ``DomainError``.  Bars come back sorted by date.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_bars(handle)
    if isinstance(source, (bytes, bytearray)):
        return load_bars(io.StringIO(source.decode("utf-8")))

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvParseError("empty file", 1) from None
    if header != CSV_HEADER.split(","):
        raise CsvParseError(f"header must be exactly {CSV_HEADER!r}", 1)

    bars: list[DailyBar] = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 6:
            raise CsvParseError(f"expected 6 fields, got {len(row)}", line)
        try:
            date = datetime.date.fromisoformat(row[0])
        except ValueError:
            raise CsvParseError(f"bad date {row[0]!r}", line) from None
        numbers = [_parse_float(row[i], name, line)
                   for i, name in enumerate(("open", "high", "low", "close",
                                             "volume"), start=1)]
        try:
            bars.append(DailyBar(date, *numbers))
        except DomainError as exc:
            raise DomainError(f"line {line}: {exc}") from None

    bars.sort(key=lambda b: b.date)
    for prev, cur in zip(bars, bars[1:]):
        if prev.date == cur.date:
            raise DomainError(f"duplicate date {cur.date.isoformat()}")
    return bars


def compute_returns(bars: Sequence[DailyBar]) -> list[ReturnRecord]:
    """Daily log returns: ln(close) - ln(open), volume carried through."""
    if not bars:
        raise DomainError("no bars to compute returns from")
    return [ReturnRecord(b.date, math.log(b.close) - math.log(b.open), b.volume)
            for b in bars]


def eligible(records: Sequence[ReturnRecord], min_days: int = 972) -> bool:
    """True when the series has at least ``min_days`` trading days.

    The default is four years at 243 trading days per year.
    """
    return len(records) >= min_days


def _step_seed(seed: int, step: int) -> int:
    """Per-step bootstrap seed, decorrelated across sweep steps."""
    return int(np.random.SeedSequence([seed, step]).generate_state(1, np.uint64)[0])


def detect_ground_level(records: Sequence[ReturnRecord],
                        config: DetectionConfig | None = None) -> DetectionResult:
    """Sweep volume thresholds until the at-or-above subset turns multimodal.

    Thresholds are v_min + (start + k*step) * (v_max - v_min) for
    k = 0, 1, 2, ...; days split into below-threshold and at-or-above
    subsets (ties go above).  The sweep stops with an estimate at the
    first p-value below ``alpha_sig``, or flagged once the subset falls
    below ``min_subset_days``.  Deterministic given the config seed.
    """
    if config is None:
        config = DetectionConfig()
    if len(records) < config.min_subset_days:
        raise DomainError(
            f"need at least {config.min_subset_days} records, got {len(records)}")
    volumes = np.array([rec.volume for rec in records], dtype=np.float64)
    returns = np.array([rec.r for rec in records], dtype=np.float64)
    v_min = float(volumes.min())
    v_max = float(volumes.max())
    if v_max == v_min:
        raise DomainError("volumes are all equal; no threshold sweep possible")

    trace: list[TraceStep] = []
    step = 0
    while True:
        fraction = config.start_fraction + step * config.step_fraction
        threshold = v_min + fraction * (v_max - v_min)
        subset = returns[volumes >= threshold]
        if fraction > 1.0 or subset.shape[0] < config.min_subset_days:
            return DetectionResult(e0=None, eta=None, v_max=v_max, v_min=v_min,
                                   n_records=len(records), config=config,
                                   trace=tuple(trace))
        verdict = modality_pvalue(subset, n_boot=config.n_boot,
                                  seed=_step_seed(config.seed, step))
        trace.append(TraceStep(threshold=threshold, subset_size=subset.shape[0],
                               dip=verdict.statistic, p_value=verdict.p_value))
        if verdict.p_value < config.alpha_sig:
            return DetectionResult(e0=threshold, eta=threshold / v_max,
                                   v_max=v_max, v_min=v_min,
                                   n_records=len(records), config=config,
                                   trace=tuple(trace))
        step += 1


def sample_returns(density: DensityGrid, n: int, seed: int = 0) -> np.ndarray:
    """n i.i.d. draws from a grid density by piecewise-linear CDF inversion."""
    if n < 0:
        raise DomainError("n must be >= 0")
    seed = _check_seed(seed)
    if n == 0:
        return np.empty(0, dtype=np.float64)
    f = density.f
    dr = density.dr
    cell_mass = 0.5 * (f[1:] + f[:-1]) * dr
    cdf = np.concatenate(([0.0], np.cumsum(cell_mass)))
    cdf /= cdf[-1]
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, _STREAM_SAMPLE], dtype=np.uint64)))
    u = rng.random(n)
    idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, f.shape[0] - 2)
    mass = cdf[idx + 1] - cdf[idx]
    frac = np.where(mass > 0.0, (u - cdf[idx]) / np.where(mass > 0.0, mass, 1.0), 0.5)
    return density.r[idx] + frac * dr


def synthesize_market(params: ModelParams, low_level: int = 0, high_level: int = 1,
                      threshold_percentile: float = 60.0, n_days: int = 2000,
                      seed: int = 0,
                      volume_log_sigma: float = _LOG_VOLUME_SIGMA) -> list[ReturnRecord]:
    """Synthetic market with a planted volume threshold between two levels.

    Volumes are log-normal; days below the given volume percentile draw
    returns from ``low_level``'s density, days at or above from
    ``high_level``'s.  Deterministic given the seed.
    """
    if n_days < 0:
        raise DomainError("n_days must be >= 0")
    if not 0.0 < threshold_percentile < 100.0:
        raise DomainError("threshold_percentile must be in (0, 100)")
    for name, level in (("low_level", low_level), ("high_level", high_level)):
        if level < 0 or level > HARMONIC_DENSITY_MAX:
            raise DomainError(f"{name} must be in [0, {HARMONIC_DENSITY_MAX}]")
    seed = _check_seed(seed)
    if n_days == 0:
        return []

    vol_rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, _STREAM_VOLUMES], dtype=np.uint64)))
    volumes = vol_rng.lognormal(mean=_LOG_VOLUME_MEAN, sigma=volume_log_sigma,
                                size=n_days)
    threshold = float(np.percentile(volumes, threshold_percentile))
    high_mask = volumes >= threshold

    low_density = harmonic_density(low_level, params)
    high_density = (low_density if high_level == low_level
                    else harmonic_density(high_level, params))
    returns = np.empty(n_days, dtype=np.float64)
    returns[~high_mask] = sample_returns(low_density, int(np.sum(~high_mask)),
                                         seed=_step_seed(seed, _STREAM_LOW))
    returns[high_mask] = sample_returns(high_density, int(np.sum(high_mask)),
                                        seed=_step_seed(seed, _STREAM_HIGH))

    return [ReturnRecord(_SYNTH_EPOCH + datetime.timedelta(days=k),
                         float(returns[k]), float(volumes[k]))
            for k in range(n_days)]


def planted_threshold(params: ModelParams, threshold_percentile: float = 60.0,
                      n_days: int = 2000, seed: int = 0,
                      volume_log_sigma: float = _LOG_VOLUME_SIGMA) -> float:
    """The volume threshold a synthesize_market call with these arguments plants."""
    vol_rng = np.random.Generator(
        np.random.Philox(key=np.array([_check_seed(seed), _STREAM_VOLUMES],
                                      dtype=np.uint64)))
    volumes = vol_rng.lognormal(mean=_LOG_VOLUME_MEAN, sigma=volume_log_sigma,
                                size=n_days)
    return float(np.percentile(volumes, threshold_percentile))


def bars_from_records(records: Sequence[ReturnRecord]) -> list[DailyBar]:
    """Price bars realizing given returns: open 100, close 100*e^r."""
    bars = []
    for rec in records:
        close = 100.0 * math.exp(rec.r)
        bars.append(DailyBar(date=rec.date, open=100.0,
                             high=max(100.0, close), low=min(100.0, close),
                             close=close, volume=rec.volume))
    return bars


def format_decimal(value: float) -> str:
    """Round-trip decimal formatting used in all tabular file output."""
    return format(value, ".17g")


def bars_to_csv(bars: Iterable[DailyBar]) -> str:
    """Serialize bars in the canonical CSV format."""
    lines = [CSV_HEADER]
    for b in bars:
        lines.append(",".join((b.date.isoformat(), format_decimal(b.open),
                               format_decimal(b.high), format_decimal(b.low),
                               format_decimal(b.close), format_decimal(b.volume))))
    return "\n".join(lines) + "\n"


def config_to_dict(config: DetectionConfig) -> dict:
    return {
        "start_fraction": config.start_fraction,
        "step_fraction": config.step_fraction,
        "n_boot": config.n_boot,
        "alpha_sig": config.alpha_sig,
        "min_subset_days": config.min_subset_days,
        "seed": config.seed,
    }


def result_to_dict(result: DetectionResult) -> dict:
    """Machine-readable detection outcome (JSON-compatible)."""
    return {
        "e0": result.e0,
        "eta": ">1" if result.flagged else result.eta,
        "flagged": result.flagged,
        "v_max": result.v_max,
        "v_min": result.v_min,
        "n_records": result.n_records,
        "config": config_to_dict(result.config),
        "trace": [
            {"threshold": t.threshold, "subset_size": t.subset_size,
             "dip": t.dip, "p_value": t.p_value}
            for t in result.trace
        ],
    }
