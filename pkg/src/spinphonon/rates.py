"""Golden-rule vibrational relaxation rates of the primary modes.

Each primary mode decays into the residual bath through its bilinear
couplings; the energy-conserving deltas are replaced by a normalized
lineshape of configurable width so a discrete residual spectrum produces
finite rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CM1_TO_RAD_PER_PS
from .core import bose_occupation
from .errors import ValidationError
from .projection import ProjectionResult

__all__ = [
    "RateRequest",
    "RateResult",
    "lineshape_value",
    "relaxation_rate",
    "compute_rates",
    "rate_temperature_scan",
    "correlation_function",
]

LINESHAPES = ("gaussian", "lorentzian")


@dataclass(frozen=True)
class RateRequest:
    projection: ProjectionResult
    temperature: float  # K
    sigma: float = 10.0  # broadening width, cm^-1
    lineshape: str = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError(f"broadening width must be positive, got {self.sigma}")
        if self.temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")
        if self.lineshape not in LINESHAPES:
            raise ValidationError(
                f"lineshape must be one of {LINESHAPES}, got {self.lineshape!r}"
            )


@dataclass(frozen=True)
class RateResult:
    rates: np.ndarray  # 1/T_vib,k in ps^-1
    lifetimes: np.ndarray  # T_vib,k in ps (inf where rate is 0)


def lineshape_value(x: float, sigma: float, kind: str) -> float:
    """Normalized broadened delta: Gaussian of std sigma or Lorentzian of
    half-width sigma (units: inverse cm^-1)."""
    if kind == "gaussian":
        return math.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    if kind == "lorentzian":
        return (sigma / math.pi) / (x * x + sigma * sigma)
    raise ValidationError(f"unknown lineshape {kind!r}")


def relaxation_rate(req: RateRequest, k: int) -> float:
    """1/T_vib of primary mode k in ps^-1.

    Evaluated as (pi/omega_k) sum_q (gamma_kq^2 / 2 omega_q)
    [(1+n_q) delta(omega_k - omega_q) + n_q delta(omega_q - omega_k)]
    in cm^-1, then converted once to ps^-1.
    """
    proj = req.projection
    if not 0 <= k < proj.n_primary:
        raise ValidationError(f"primary index {k} out of range")
    w_k = proj.primary_freqs[k]
    total = 0.0
    for q in range(proj.n_residual):
        w_q = proj.residual_freqs[q]
        gamma = proj.bilinear_couplings[k, q]
        n_q = bose_occupation(w_q, req.temperature)
        down = (1.0 + n_q) * lineshape_value(w_k - w_q, req.sigma, req.lineshape)
        up = n_q * lineshape_value(w_q - w_k, req.sigma, req.lineshape)
        total += gamma * gamma / (2.0 * w_q) * (down + up)
    rate_cm = math.pi / w_k * total
    return rate_cm * CM1_TO_RAD_PER_PS


def compute_rates(req: RateRequest) -> RateResult:
    rates = np.array(
        [relaxation_rate(req, k) for k in range(req.projection.n_primary)]
    )
    lifetimes = np.full_like(rates, np.inf)
    np.divide(1.0, rates, out=lifetimes, where=rates > 0)
    return RateResult(rates=rates, lifetimes=lifetimes)


def rate_temperature_scan(
    projection: ProjectionResult,
    T_grid,
    sigma: float = 10.0,
    lineshape: str = "gaussian",
) -> np.ndarray:
    """Rates on an ascending temperature grid; rows (T, rate_1, ..., rate_P)."""
    T_grid = np.asarray(T_grid, dtype=float)
    if T_grid.size == 0:
        raise ValidationError("temperature grid must be nonempty")
    if np.any(np.diff(T_grid) <= 0):
        raise ValidationError("temperature grid must be strictly ascending")
    rows = []
    for T in T_grid:
        req = RateRequest(projection, float(T), sigma, lineshape)
        rows.append([T] + [relaxation_rate(req, k) for k in range(projection.n_primary)])
    return np.array(rows)


def correlation_function(omega_q: float, T: float, t: float) -> complex:
    """Thermal residual-coordinate autocorrelation <Y_q(t) Y_q(0)>.

    omega_q in cm^-1, t in ps; the phase advances through the angular
    conversion, the 1/(2 omega_q) prefactor stays in cm^-1 units.
    """
    if omega_q <= 0:
        raise ValidationError(f"frequency must be positive, got {omega_q}")
    n = bose_occupation(omega_q, T)
    phase = omega_q * CM1_TO_RAD_PER_PS * t
    return ((1.0 + n) * np.exp(-1j * phase) + n * np.exp(1j * phase)) / (2.0 * omega_q)
