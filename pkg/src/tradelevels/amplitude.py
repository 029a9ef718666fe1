"""Trading-intention amplitudes.

An amplitude is a complex number in polar form: the modulus is the
intensity of the intention to trade at a given return, the phase encodes
its character (position rebalancing on the real axis, sentiment on the
imaginary axis).  The return density is the squared modulus, so summing
amplitudes of interacting trader groups produces interference terms that
classical mixing of densities cannot express.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Amplitude:
    """One amplitude in polar form.

    The phase is stored unreduced; compare phases modulo 2*pi.  A
    zero-modulus amplitude carries phase 0 by convention (the phase is
    undefined at the origin).
    """

    modulus: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.modulus) and math.isfinite(self.phase)):
            raise DomainError("amplitude fields must be finite")
        if self.modulus < 0:
            raise DomainError(f"modulus must be >= 0, got {self.modulus}")

    @property
    def density(self) -> float:
        """Probability density contributed by this amplitude (modulus squared)."""
        return self.modulus * self.modulus

    def to_complex(self) -> complex:
        return cmath.rect(self.modulus, self.phase)

    @classmethod
    def from_complex(cls, z: complex) -> "Amplitude":
        # math.atan2 instead of cmath.phase: the latter trips libm's
        # errno on subnormal components and raises OverflowError
        m = abs(z)
        return cls(m, math.atan2(z.imag, z.real) if m > 0.0 else 0.0)

    @classmethod
    def from_components(cls, rebalance: float, sentiment: float) -> "Amplitude":
        """Rebuild an amplitude from its (rebalancing, sentiment) split."""
        return cls.from_complex(complex(rebalance, sentiment))


def wrap_phase(theta: float) -> float:
    """Reduce a phase to (-pi, pi]."""
    w = math.remainder(theta, TWO_PI)
    return w if w != -math.pi else math.pi


def phases_equal(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(math.remainder(a - b, TWO_PI)) <= tol


def isclose(a: Amplitude, b: Amplitude, tol: float = 1e-12) -> bool:
    """Equality up to ``tol``: moduli compared directly, phases modulo 2*pi.

    Phases are ignored when both moduli are below ``tol`` (the phase of a
    vanishing amplitude is arbitrary).
    """
    if abs(a.modulus - b.modulus) > tol:
        return False
    if a.modulus <= tol and b.modulus <= tol:
        return True
    return phases_equal(a.phase, b.phase, tol)


def superpose(parts: Sequence[Amplitude] | Iterable[Amplitude]) -> Amplitude:
    """Sum amplitudes of co-present trader groups into the market amplitude.

    The sum runs in rectangular form and is re-expressed in polar form.
    Raises ``DomainError`` on empty input.
    """
    total = 0j
    count = 0
    for part in parts:
        total += part.to_complex()
        count += 1
    if count == 0:
        raise DomainError("superpose requires at least one amplitude")
    return Amplitude.from_complex(total)


def interference_density(psi1: Amplitude, psi2: Amplitude) -> float:
    """Density of two interacting groups: phi1^2 + phi2^2 + 2*phi1*phi2*cos(dtheta).

    Equals ``superpose([psi1, psi2]).density`` up to roundoff.  The cross
    term is the information-interaction effect: maximal for aligned
    phases, a full no-trade cancellation for opposite ones.
    """
    cross = 2.0 * psi1.modulus * psi2.modulus * math.cos(psi1.phase - psi2.phase)
    value = psi1.density + psi2.density + cross
    return max(value, 0.0)


def components(psi: Amplitude) -> tuple[float, float]:
    """Split an amplitude into (position-rebalancing, sentiment) parts.

    Positive first component: adding demand; positive second: bearish
    sentiment.  The squares sum back to the density.
    """
    return (
        psi.modulus * math.cos(psi.phase),
        psi.modulus * math.sin(psi.phase),
    )


@dataclass(frozen=True, eq=False)
class AmplitudeGrid:
    """Complex amplitude sampled on a uniform return grid symmetric about 0.

    ``psi`` holds one complex value per node.  The node count is odd so
    that r = 0 is a node.
    """

    r_min: float
    r_max: float
    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.complex128)
        if psi.ndim != 1:
            raise DomainError("psi must be one-dimensional")
        object.__setattr__(self, "psi", psi)
        n = psi.shape[0]
        if n < 3 or n % 2 == 0:
            raise DomainError(f"n_points must be odd and >= 3, got {n}")
        if not (math.isfinite(self.r_min) and math.isfinite(self.r_max)):
            raise DomainError("grid bounds must be finite")
        if self.r_min != -self.r_max or self.r_max <= 0.0:
            raise DomainError("grid must be symmetric about 0 with r_max > 0")

    @property
    def n_points(self) -> int:
        return self.psi.shape[0]

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / (self.n_points - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_points)

    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def norm(self) -> float:
        """Trapezoid integral of the squared modulus."""
        return float(np.trapezoid(self.density(), dx=self.dr))

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "AmplitudeGrid":
        norm = self.norm()
        if norm <= 0.0 or not math.isfinite(norm):
            raise DomainError("cannot normalize a zero or non-finite amplitude grid")
        return AmplitudeGrid(self.r_min, self.r_max, self.psi / math.sqrt(norm))

    def amplitudes(self) -> list[Amplitude]:
        """Per-node polar view of the grid values."""
        return [Amplitude.from_complex(complex(z)) for z in self.psi]

    @classmethod
    def from_function(cls, fn, r_max: float, n_points: int) -> "AmplitudeGrid":
        r = np.linspace(-r_max, r_max, n_points)
        return cls(-r_max, r_max, np.asarray(fn(r), dtype=np.complex128))
