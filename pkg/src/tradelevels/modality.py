"""Multimodality testing for return samples.

The test statistic is the dip: the distance from the empirical CDF to the
closest unimodal CDF.  Significance comes from Monte Carlo calibration
against the uniform null (the dip's least favorable unimodal
distribution), with an add-one p-value so a finite bootstrap never
reports exactly zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._dip import _dip_sorted
from .errors import DomainError

#: Default bootstrap replication count.
DEFAULT_N_BOOT = 100

_UINT64_MAX = 2 ** 64 - 1

#: Relative jitter used to break exact ties before the no-ties kernel.
_TIE_JITTER = 1e-9


@dataclass(frozen=True, eq=False)
class Sample:
    """A return sample stored sorted ascending."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] == 0:
            raise DomainError("sample must be a non-empty 1-d array")
        if not np.all(np.isfinite(v)):
            raise DomainError("sample values must be finite")
        object.__setattr__(self, "values", np.sort(v))

    def __len__(self) -> int:
        return self.values.shape[0]

    @classmethod
    def of(cls, data) -> "Sample":
        if isinstance(data, Sample):
            return data
        return cls(np.asarray(data, dtype=np.float64))


@dataclass(frozen=True)
class ModalityVerdict:
    """Outcome of one calibrated test, reproducible from (sample, n_boot, seed)."""

    statistic: float
    p_value: float
    n_boot: int
    seed: int


def _replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Counter-based stream for one bootstrap replicate.

    Keying the Philox generator with (seed, replicate) makes every
    replicate independent of evaluation order, so concurrent and
    sequential runs agree bit for bit.
    """
    key = np.array([seed, replicate], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > _UINT64_MAX:
        raise DomainError("seed must fit in an unsigned 64-bit integer")
    return seed


def _dip_of_sorted(x: np.ndarray) -> float:
    """Dip of sorted data, handling degenerate and tied inputs."""
    n = x.shape[0]
    floor = 1.0 / (2.0 * n)
    if x[0] == x[-1]:
        return floor
    if np.any(x[1:] == x[:-1]):
        span = x[-1] - x[0]
        x = (x - x[0]) + np.arange(1, n + 1) * (span * _TIE_JITTER / n)
    value = float(_dip_sorted(np.ascontiguousarray(x)))
    return max(value, floor)


def dip_statistic(sample) -> float:
    """Dip of a sample of at least 4 points; value in [1/(2n), 0.25].

    An all-equal sample sits at the lower bound 1/(2n).  Tied values are
    separated by a deterministic relative jitter of 1e-9 before the
    sweep, which needs strictly increasing data; the statistic is
    unchanged beyond that scale.
    """
    x = Sample.of(sample).values
    if x.shape[0] < 4:
        raise DomainError(f"dip needs at least 4 values, got {x.shape[0]}")
    return _dip_of_sorted(x)


def modality_pvalue(sample, n_boot: int = DEFAULT_N_BOOT,
                    seed: int = 0) -> ModalityVerdict:
    """Calibrated unimodality test.

    Draws ``n_boot`` uniform samples of the observed size, dips each, and
    returns p = (1 + #{replicate dip >= observed}) / (n_boot + 1).  Small
    p rejects unimodality.
    """
    s = Sample.of(sample)
    if n_boot < 1:
        raise DomainError("n_boot must be >= 1")
    seed = _check_seed(seed)
    observed = dip_statistic(s)
    n = len(s)
    exceed = 0
    for k in range(n_boot):
        draw = np.sort(_replicate_rng(seed, k).random(n))
        if _dip_of_sorted(draw) >= observed:
            exceed += 1
    p_value = (1.0 + exceed) / (n_boot + 1.0)
    return ModalityVerdict(statistic=observed, p_value=p_value,
                           n_boot=n_boot, seed=seed)
