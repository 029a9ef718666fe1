"""Level spectra and return densities of the trading equation.

The stationary amplitude solves, in the scaled coordinate
xi = (alpha/h)^(1/4) r,

    -phi'' + (xi^2 + lambda xi^4) phi = Omega phi,

where lambda = delta/(2 alpha) * sqrt(h/alpha) and Omega is the
normalized intrinsic volume.  Three solution paths are provided: the
closed-form harmonic branch (lambda = 0, Hermite functions, Omega = 2n+1),
the cubic branch equation for anharmonic levels, and a finite-difference
eigensolver that serves as the numerical reference for both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .amplitude import AmplitudeGrid
from .errors import DomainError, GridMismatchError, LevelBreakdownError, ResolutionError
from .spectral import GridSpec

#: Largest supported Hermite order (values overflow doubles beyond this).
HERMITE_MAX = 60

#: Largest level for closed-form densities (normalization stays in range).
HARMONIC_DENSITY_MAX = 30

#: |beta| limit for a root on the physical branch of x^3 - x = beta.
BRANCH_LIMIT = 2.0 / (3.0 * math.sqrt(3.0))

_DEFAULT_XI_MAX = 12.0
_DEFAULT_N_POINTS = 4097


@dataclass(frozen=True)
class ModelParams:
    """Model constants: volume scale h, quadratic alpha, quartic delta."""

    h: float
    alpha: float
    delta: float = 0.0

    def __post_init__(self):
        for name in ("h", "alpha", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.h <= 0.0:
            raise DomainError(f"h must be positive, got {self.h}")
        if self.alpha <= 0.0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    @property
    def lam(self) -> float:
        """Dimensionless quartic coupling of the scaled equation."""
        return self.delta / (2.0 * self.alpha) * math.sqrt(self.h / self.alpha)

    @property
    def sigma(self) -> float:
        """Ground-level return standard deviation (h / 4 alpha)^(1/4)."""
        return (self.h / (4.0 * self.alpha)) ** 0.25

    @property
    def length_scale(self) -> float:
        """Return units per unit of the scaled coordinate: (h/alpha)^(1/4)."""
        return (self.h / self.alpha) ** 0.25

    def delta_for_lam(self, lam: float) -> float:
        """Quartic coefficient that produces the given scaled coupling."""
        return 2.0 * self.alpha * lam * math.sqrt(self.alpha / self.h)


@dataclass(frozen=True)
class SdgParams:
    """Supply-demand-gap microfoundation.

    a: rational speculators, b: irrational speculators, c: liquidity
    providers, gamma: counteraction ratio, lambda_a / lambda_c:
    risk-aversion curvature of speculators / providers.
    """

    a: float
    b: float
    c: float
    gamma: float
    lambda_a: float = 0.0
    lambda_c: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "lambda_a", "lambda_c"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be >= 0")
        if self.gamma <= 0.0:
            raise DomainError("gamma must be positive")
        if self.alpha <= 0.0:
            raise DomainError(
                "a + b - c*gamma must be positive for a solvable model, "
                f"got {self.alpha}")

    @property
    def alpha(self) -> float:
        return self.a + self.b - self.c * self.gamma

    @property
    def delta(self) -> float:
        return self.gamma * self.lambda_c - self.lambda_a

    def model_params(self, h: float) -> ModelParams:
        return ModelParams(h=h, alpha=self.alpha, delta=self.delta)


@dataclass(frozen=True)
class EnergyLevel:
    """A discrete trading level: index, normalized and raw intrinsic volume."""

    n: int
    omega: float
    e_bar: float


@dataclass(frozen=True, eq=False)
class EigenState:
    """Numeric eigenpair on the scaled grid.

    ``vector`` is trapezoid-normalized with the first significant
    component positive.  ``physical`` is False when the eigenvalue lies
    above the local potential barrier (possible for negative coupling).
    """

    n: int
    omega: float
    xi_max: float
    vector: np.ndarray
    physical: bool = True

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(-self.xi_max, self.xi_max, self.vector.shape[0])


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Nonnegative density on a uniform, origin-symmetric return grid."""

    r_min: float
    r_max: float
    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.float64)
        if f.ndim != 1 or f.shape[0] < 3:
            raise DomainError("density must be a 1-d array with >= 3 nodes")
        object.__setattr__(self, "f", f)
        if self.r_min != -self.r_max or self.r_max <= 0.0:
            raise DomainError("grid must be symmetric about 0 with r_max > 0")
        if np.any(f < 0.0) or not np.all(np.isfinite(f)):
            raise DomainError("density values must be finite and >= 0")
        total = float(np.trapezoid(f, dx=self.dr))
        if abs(total - 1.0) > 1e-6:
            raise DomainError(f"density must integrate to 1, got {total!r}")

    @property
    def n_points(self) -> int:
        return self.f.shape[0]

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / (self.n_points - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_points)


def hermite(n: int, xi):
    """Physicists' Hermite polynomial H_n via the three-term recurrence.

    Accepts a scalar or array argument.  n is capped at ``HERMITE_MAX``.
    """
    if n < 0 or n > HERMITE_MAX:
        raise DomainError(f"hermite order must be in [0, {HERMITE_MAX}], got {n}")
    scalar = np.isscalar(xi)
    x = np.asarray(xi, dtype=np.float64)
    h_prev = np.ones_like(x)
    if n == 0:
        return float(h_prev) if scalar else h_prev
    h_cur = 2.0 * x
    for k in range(1, n):
        h_prev, h_cur = h_cur, 2.0 * x * h_cur - 2.0 * k * h_prev
    return float(h_cur) if scalar else h_cur


def harmonic_level(n: int, params: ModelParams) -> EnergyLevel:
    """Level n of the harmonic branch: Omega = 2n+1, E = sqrt(alpha h) Omega / 2."""
    if params.delta != 0.0:
        raise DomainError("harmonic levels require delta = 0; use the anharmonic path")
    if n < 0:
        raise DomainError("level index must be >= 0")
    omega = 2.0 * n + 1.0
    return EnergyLevel(n=n, omega=omega,
                       e_bar=0.5 * math.sqrt(params.alpha * params.h) * omega)


def _log_norm_sq(n: int, params: ModelParams) -> float:
    """log of A_n^2, the squared density normalization in return units."""
    return (0.25 * math.log(params.alpha / params.h)
            - n * math.log(2.0) - math.lgamma(n + 1.0)
            - 0.5 * math.log(math.pi))


def harmonic_state_xi(n: int, xi: np.ndarray) -> np.ndarray:
    """Unit-norm stationary solution of the harmonic branch on the scaled axis."""
    if n < 0 or n > HERMITE_MAX:
        raise DomainError(f"level must be in [0, {HERMITE_MAX}], got {n}")
    log_a = -0.5 * (n * math.log(2.0) + math.lgamma(n + 1.0) + 0.5 * math.log(math.pi))
    return hermite(n, xi) * np.exp(log_a - 0.5 * xi * xi)


def default_density_spec(n: int, params: ModelParams) -> GridSpec:
    """Default return grid for level n: wide enough past the turning point."""
    xi_span = max(_DEFAULT_XI_MAX / math.sqrt(2.0), math.sqrt(2.0 * n + 1.0) + 6.0)
    r_max = xi_span * params.length_scale
    return GridSpec(-r_max, r_max, _DEFAULT_N_POINTS)


def harmonic_amplitude_grid(n: int, params: ModelParams,
                            grid: GridSpec | None = None) -> AmplitudeGrid:
    """Level-n stationary amplitude sampled in return units (real-valued)."""
    if params.delta != 0.0:
        raise DomainError("harmonic amplitudes require delta = 0")
    if grid is None:
        grid = default_density_spec(n, params)
    r = grid.nodes()
    xi = r / params.length_scale
    psi = harmonic_state_xi(n, xi) / math.sqrt(params.length_scale)
    return AmplitudeGrid(grid.start, grid.stop, psi.astype(np.complex128))


def harmonic_density(n: int, params: ModelParams,
                     grid: GridSpec | None = None) -> DensityGrid:
    """Return density of harmonic level n: A_n^2 e^{-xi^2} H_n(xi)^2.

    The scaled-coordinate Jacobian is folded into A_n^2, so the density
    integrates to 1 in return units.  Level 0 is the normal density with
    sigma = (h / 4 alpha)^(1/4).
    """
    if params.delta != 0.0:
        raise DomainError("harmonic densities require delta = 0; use the numeric path")
    if n < 0 or n > HARMONIC_DENSITY_MAX:
        raise DomainError(
            f"harmonic density level must be in [0, {HARMONIC_DENSITY_MAX}], got {n}")
    if grid is None:
        grid = default_density_spec(n, params)
    r = grid.nodes()
    xi = r / params.length_scale
    half_log = 0.5 * _log_norm_sq(n, params)
    root = hermite(n, xi) * np.exp(half_log - 0.5 * xi * xi)
    return DensityGrid(grid.start, grid.stop, root * root)


def level_beta(n: int, lam: float) -> float:
    """Right-hand side of the cubic branch equation for level n."""
    return (4.0 / 3.0) * (1.0 + 2.0 * n / 3.0) * lam


def branch_root(beta: float) -> float:
    """Root of x^3 - x = beta on the branch through x = 1 at beta = 0.

    For beta > 0 this is the unique root above 1; for beta < 0 the largest
    real root, which lies in (1/sqrt(3), 1).  Below -BRANCH_LIMIT no root
    remains on the branch.
    """
    if not math.isfinite(beta):
        raise DomainError("beta must be finite")
    if beta < -BRANCH_LIMIT:
        raise DomainError(f"beta={beta!r} below branch limit {-BRANCH_LIMIT!r}")
    scale = 2.0 / math.sqrt(3.0)
    ratio = beta / BRANCH_LIMIT
    if ratio <= 1.0:
        x = scale * math.cos(math.acos(max(ratio, -1.0)) / 3.0)
    else:
        x = scale * math.cosh(math.acosh(ratio) / 3.0)
    # Newton polish; the derivative vanishes only at the branch endpoint.
    for _ in range(3):
        slope = 3.0 * x * x - 1.0
        if abs(slope) < 1e-8:
            break
        x -= (x * x * x - x - beta) / slope
    return x


def anharmonic_level(n: int, lam: float, params: ModelParams) -> EnergyLevel:
    """Level n from the cubic branch equation; Omega_n = (2n+1) x_n."""
    if n < 0:
        raise DomainError("level index must be >= 0")
    beta = level_beta(n, lam)
    try:
        x = branch_root(beta)
    except DomainError:
        raise LevelBreakdownError(n, lam, beta) from None
    omega = (2.0 * n + 1.0) * x
    return EnergyLevel(n=n, omega=omega,
                       e_bar=0.5 * math.sqrt(params.alpha * params.h) * omega)


def anharmonic_levels(lam: float, n_max: int,
                      params: ModelParams) -> list[EnergyLevel]:
    """Levels 0..n_max from the cubic branch equation.

    Raises ``LevelBreakdownError`` (carrying the failing index) as soon as
    a level leaves the branch; lower levels are always valid first.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    return [anharmonic_level(n, lam, params) for n in range(n_max + 1)]


def barrier_height(lam: float) -> float:
    """Local maximum of xi^2 + lam xi^4 for lam < 0 (inf otherwise)."""
    if lam >= 0.0:
        return math.inf
    return -1.0 / (4.0 * lam)


def _tridiagonal_system(lam: float, xi_max: float, n_points: int):
    xi = np.linspace(-xi_max, xi_max, n_points)
    step = xi[1] - xi[0]
    inner = xi[1:-1]
    diag = 2.0 / step ** 2 + inner ** 2 + lam * inner ** 4
    off = np.full(n_points - 3, -1.0 / step ** 2)
    return xi, diag, off


def _spectrum_values(lam: float, n_max: int, xi_max: float,
                     n_points: int) -> np.ndarray:
    _, diag, off = _tridiagonal_system(lam, xi_max, n_points)
    return eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, n_max))


def numeric_spectrum(lam: float, n_max: int, xi_max: float | None = None,
                     n_points: int = _DEFAULT_N_POINTS,
                     check_resolution: bool = True) -> list[EigenState]:
    """Lowest n_max+1 eigenpairs of the scaled trading equation.

    Uniform grid, three-point stencil, hard-wall boundaries; the
    tridiagonal eigenproblem is solved by Sturm-sequence bisection with
    inverse-iteration eigenvectors.  Eigenvectors come back
    trapezoid-normalized with the first significant component positive.

    For lam < 0 the potential is unbounded below; the default grid is then
    clamped to the barrier region and every level above the barrier height
    is flagged non-physical.  When ``check_resolution`` is on, eigenvalues
    are recomputed on a doubled grid and a drift above 1e-3 raises
    ``ResolutionError``.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if n_points < 65 or n_points % 2 == 0:
        raise DomainError("n_points must be odd and >= 65")
    if xi_max is None:
        xi_max = _DEFAULT_XI_MAX
        if lam < 0.0:
            xi_max = min(xi_max, math.sqrt(-1.0 / (2.0 * lam)))
    if n_max + 1 > n_points - 2:
        raise DomainError("n_max too large for the grid size")

    xi, diag, off = _tridiagonal_system(lam, xi_max, n_points)
    values, vectors = eigh_tridiagonal(diag, off, select="i",
                                       select_range=(0, n_max))
    if check_resolution:
        refined = _spectrum_values(lam, n_max, xi_max, 2 * n_points - 1)
        drift = float(np.max(np.abs(values - refined)))
        if drift > 1e-3:
            raise ResolutionError(
                f"eigenvalues drift by {drift!r} under grid doubling; "
                "increase n_points")

    step = xi[1] - xi[0]
    barrier = barrier_height(lam)
    states = []
    for k in range(n_max + 1):
        vec = np.zeros(n_points)
        vec[1:-1] = vectors[:, k]
        vec /= math.sqrt(float(np.trapezoid(vec ** 2, dx=step)))
        significant = np.flatnonzero(np.abs(vec) > 1e-12 * np.max(np.abs(vec)))
        if vec[significant[0]] < 0.0:
            vec = -vec
        states.append(EigenState(n=k, omega=float(values[k]), xi_max=xi_max,
                                 vector=vec, physical=bool(values[k] < barrier)))
    return states


def density_from_state(state: EigenState, params: ModelParams) -> DensityGrid:
    """Return density of a numeric eigenstate, mapped to return units."""
    scale = params.length_scale
    return DensityGrid(-state.xi_max * scale, state.xi_max * scale,
                       state.vector ** 2 / scale)


def mixture_density(weights: Sequence[float],
                    densities: Sequence[DensityGrid]) -> DensityGrid:
    """Convex combination of densities on identical grids."""
    if len(weights) != len(densities) or not densities:
        raise DomainError("need one weight per density, at least one of each")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0.0):
        raise DomainError("weights must be >= 0")
    if abs(float(w.sum()) - 1.0) > 1e-12:
        raise DomainError(f"weights must sum to 1, got {float(w.sum())!r}")
    first = densities[0]
    for d in densities[1:]:
        if (d.r_min != first.r_min or d.r_max != first.r_max
                or d.n_points != first.n_points):
            raise GridMismatchError("mixture components must share one grid")
    mixed = np.zeros(first.n_points)
    for wk, d in zip(w, densities):
        mixed += wk * d.f
    return DensityGrid(first.r_min, first.r_max, mixed)


def count_modes(density, prominence: float = 0.01) -> int:
    """Count strict local maxima rising above their flanking minima.

    A peak counts when its height exceeds the higher of the two adjacent
    valleys (grid-edge values for the outermost peaks) by more than
    ``prominence`` times the global maximum.  Accepts a ``DensityGrid``
    or a plain array of density values.
    """
    if prominence < 0.0:
        raise DomainError("prominence must be >= 0")
    f = density.f if isinstance(density, DensityGrid) else np.asarray(density,
                                                                      dtype=np.float64)
    peak = f.max()
    if peak <= 0.0:
        return 0
    inner = f[1:-1]
    maxima = np.flatnonzero((inner > f[:-2]) & (inner > f[2:])) + 1
    if maxima.size == 0:
        return 0
    threshold = prominence * peak
    count = 0
    bounds = np.concatenate(([0], maxima, [f.shape[0] - 1]))
    for idx in range(1, bounds.shape[0] - 1):
        left_valley = float(f[bounds[idx - 1]:bounds[idx] + 1].min())
        right_valley = float(f[bounds[idx]:bounds[idx + 1] + 1].min())
        if f[bounds[idx]] - max(left_valley, right_valley) > threshold:
            count += 1
    return count
