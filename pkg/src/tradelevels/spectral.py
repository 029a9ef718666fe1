"""Frequency decomposition of market amplitudes and volume functionals.

Traders whose intention phase rotates linearly in the return form a
sub-market indexed by the angular rate omega; the forward transform
(1/2pi convention) extracts each sub-market's coefficient.  Expected
realized volume is the curvature functional of the amplitude (equivalently
a second moment of the normalized spectral weight), expected potential
volume is the supply-demand-gap integral, and their sum is the conserved
intrinsic volume.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .amplitude import AmplitudeGrid
from .errors import DomainError, TruncationWarning

#: Modulus below which a grid is considered decayed at its boundary.
BOUNDARY_DECAY = 1e-8

#: Nodes per chunk for the direct O(N^2) transforms (bounds peak memory).
_CHUNK = 256


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid specification: [start, stop] with n_points nodes."""

    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise DomainError("grid bounds must be finite")
        if self.stop <= self.start:
            raise DomainError("grid stop must exceed start")
        if self.n_points < 3:
            raise DomainError("grid needs at least 3 points")

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.n_points - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)


@dataclass(frozen=True, eq=False)
class SpectrumGrid:
    """Complex sub-market coefficients c(omega) on a uniform omega grid.

    ``truncated`` is set when the source amplitude did not decay below
    ``BOUNDARY_DECAY`` at its grid ends, so tail mass was cut off.
    """

    omega_min: float
    omega_max: float
    c: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.complex128)
        if c.ndim != 1 or c.shape[0] < 3:
            raise DomainError("coefficients must be a 1-d array with >= 3 nodes")
        object.__setattr__(self, "c", c)
        if self.omega_max <= self.omega_min:
            raise DomainError("omega_max must exceed omega_min")

    @property
    def n_points(self) -> int:
        return self.c.shape[0]

    @property
    def d_omega(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    @property
    def omega(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_points)

    def weight(self) -> np.ndarray:
        return np.abs(self.c) ** 2

    def weight_norm(self) -> float:
        return float(np.trapezoid(self.weight(), dx=self.d_omega))

    def is_weight_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.weight_norm() - 1.0) <= tol


@dataclass(frozen=True)
class VolumeReport:
    """Expected realized and potential volume; intrinsic is their sum."""

    realized: float
    potential: float

    @property
    def intrinsic(self) -> float:
        return self.realized + self.potential


def _trapezoid_weights(n: int, step: float) -> np.ndarray:
    w = np.full(n, step)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _fourier_sum(values: np.ndarray, src: np.ndarray, step: float,
                 dst: np.ndarray, sign: float) -> np.ndarray:
    """Trapezoid quadrature of values(src)*exp(sign*i*dst*src) per dst node.

    Direct O(N*M) evaluation, chunked over dst.  Summation order is fixed
    by the chunking, so results are deterministic for a fixed input.
    """
    weighted = values * _trapezoid_weights(src.shape[0], step)
    out = np.empty(dst.shape[0], dtype=np.complex128)
    for lo in range(0, dst.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, dst.shape[0])
        kernel = np.exp((sign * 1j) * np.outer(dst[lo:hi], src))
        out[lo:hi] = kernel @ weighted
    return out


def _boundary_decayed(values: np.ndarray) -> bool:
    return bool(abs(values[0]) < BOUNDARY_DECAY and abs(values[-1]) < BOUNDARY_DECAY)


def decompose(psi: AmplitudeGrid, omega_spec: GridSpec) -> SpectrumGrid:
    """Forward transform: c(omega) = (1/2pi) * integral of psi(r) e^{-i omega r} dr.

    The amplitude should decay below ``BOUNDARY_DECAY`` at both grid ends;
    otherwise the result is flagged ``truncated`` and a
    ``TruncationWarning`` is emitted.
    """
    truncated = not _boundary_decayed(psi.psi)
    if truncated:
        warnings.warn(
            "amplitude modulus does not decay at the grid boundary; "
            "spectrum is truncated", TruncationWarning, stacklevel=2)
    omega = omega_spec.nodes()
    c = _fourier_sum(psi.psi, psi.r, psi.dr, omega, sign=-1.0) / (2.0 * math.pi)
    return SpectrumGrid(omega_spec.start, omega_spec.stop, c, truncated=truncated)


def reconstruct(spectrum: SpectrumGrid, r_spec: GridSpec) -> AmplitudeGrid:
    """Inverse transform: psi(r) = integral of c(omega) e^{+i omega r} d omega."""
    if not _boundary_decayed(spectrum.c):
        warnings.warn(
            "spectrum does not decay at the grid boundary; "
            "reconstruction is truncated", TruncationWarning, stacklevel=2)
    r = r_spec.nodes()
    psi = _fourier_sum(spectrum.c, spectrum.omega, spectrum.d_omega, r, sign=+1.0)
    return AmplitudeGrid(r_spec.start, r_spec.stop, psi)


def default_omega_spec(psi: AmplitudeGrid, span: float = 12.0) -> GridSpec:
    """Omega grid wide enough to hold the amplitude's spectral mass.

    The half-width is ``span`` times the root-mean-square frequency
    (measured from the gradient), floored at a few oscillations across the
    grid and capped at the sampling limit pi/dr.
    """
    grad = np.gradient(psi.psi, psi.dr)
    num = float(np.trapezoid(np.abs(grad) ** 2, dx=psi.dr))
    den = psi.norm()
    if den <= 0.0:
        raise DomainError("cannot size a spectrum for a zero amplitude grid")
    w_rms = math.sqrt(num / den)
    w_max = span * w_rms
    w_max = max(w_max, 24.0 / psi.r_max)
    w_max = min(w_max, math.pi / psi.dr)
    return GridSpec(-w_max, w_max, psi.n_points)


def realized_volume(psi: AmplitudeGrid, h: float, method: str = "spectral") -> float:
    """Expected realized trading volume of a normalized amplitude.

    ``spectral``: (h/2) * integral of omega^2 w(omega) d omega, where w is
    the squared spectrum renormalized to unit integral.  ``realspace``:
    trapezoid of Re[psi* (-h/2 d^2/dr^2) psi] with the three-point central
    stencil, boundary nodes dropped.  The two agree for smooth, decaying
    amplitudes.
    """
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError(f"h must be positive, got {h}")
    if not psi.is_normalized(tol=1e-6):
        raise DomainError("amplitude grid must be normalized")
    if method == "spectral":
        spectrum = decompose(psi, default_omega_spec(psi))
        weight = spectrum.weight()
        total = float(np.trapezoid(weight, dx=spectrum.d_omega))
        if total <= 0.0:
            raise DomainError("spectrum carries no weight")
        second = float(np.trapezoid(spectrum.omega ** 2 * weight, dx=spectrum.d_omega))
        return 0.5 * h * second / total
    if method == "realspace":
        values = psi.psi
        integrand = np.zeros(psi.n_points)
        second_diff = (values[:-2] - 2.0 * values[1:-1] + values[2:]) / psi.dr ** 2
        integrand[1:-1] = (np.conj(values[1:-1]) * (-0.5 * h) * second_diff).real
        return float(np.trapezoid(integrand, dx=psi.dr))
    raise DomainError(f"unknown method {method!r}; use 'spectral' or 'realspace'")


def potential_volume(psi: AmplitudeGrid, alpha: float, delta: float = 0.0) -> float:
    """Expected potential volume: integral of (alpha/2 r^2 + delta/4 r^4) |psi|^2.

    The amplitude is assumed normalized.
    """
    r = psi.r
    sdg = 0.5 * alpha * r ** 2 + 0.25 * delta * r ** 4
    return float(np.trapezoid(sdg * psi.density(), dx=psi.dr))


def intrinsic_volume(psi: AmplitudeGrid, h: float, alpha: float,
                     delta: float = 0.0, method: str = "realspace") -> VolumeReport:
    """Realized plus potential volume of a normalized amplitude.

    For a stationary amplitude at level n this reproduces the level's
    intrinsic volume (alpha*h)^(1/2) * Omega_n / 2.
    """
    realized = realized_volume(psi, h, method=method)
    potential = potential_volume(psi, alpha, delta)
    return VolumeReport(realized=realized, potential=potential)
