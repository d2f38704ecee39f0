"""Dense operator algebra on tensor-product Hilbert spaces.

Spin-1/2 and truncated-Fock operators, embedding into composite spaces,
partial traces, thermal states, von Neumann entropy and mutual information.

Conventions: spin basis index 0 is the excited (+1/2) state, index 1 the
ground state; Fock basis index equals the occupation number.  Entropies are
in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .constants import K_B
from .errors import DimensionError, NumericalError, ValidationError

__all__ = [
    "HilbertLayout",
    "QOperator",
    "DensityMatrix",
    "pauli",
    "annihilation",
    "creation",
    "number_op",
    "embed",
    "basis_state",
    "partial_trace",
    "bose_occupation",
    "thermal_state",
    "von_neumann_entropy",
    "mutual_information",
]

TRACE_TOL = 1e-10
HERM_TOL = 1e-12
PSD_TOL = 1e-9


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered subsystem dimensions; index 0 is the spin, 1..K the modes."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValidationError("layout needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ValidationError(f"every subsystem dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class QOperator:
    """Dense complex square matrix tagged with its HilbertLayout."""

    layout: HilbertLayout
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        d = self.layout.total_dim
        if data.shape != (d, d):
            raise DimensionError(
                f"operator shape {data.shape} does not match layout dimension {d}"
            )
        object.__setattr__(self, "data", data)

    def dag(self) -> "QOperator":
        return QOperator(self.layout, self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def __matmul__(self, other: "QOperator") -> "QOperator":
        return QOperator(self.layout, self.data @ other.data)

    def __add__(self, other: "QOperator") -> "QOperator":
        return QOperator(self.layout, self.data + other.data)

    def __rmul__(self, scalar) -> "QOperator":
        return QOperator(self.layout, scalar * self.data)


class DensityMatrix(QOperator):
    """QOperator that is unit-trace, Hermitian and numerically PSD."""

    def __post_init__(self):
        super().__post_init__()
        tr = np.trace(self.data)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericalError(f"density matrix trace {tr} deviates from 1")
        if np.max(np.abs(self.data - self.data.conj().T)) > HERM_TOL:
            raise NumericalError("density matrix is not Hermitian")
        lo = float(np.linalg.eigvalsh(self.data)[0])
        if lo < -PSD_TOL:
            raise NumericalError(f"density matrix has eigenvalue {lo} < -{PSD_TOL}")


def pauli(axis: str) -> QOperator:
    """Standard Pauli matrix on the spin-1/2 space (sigma_z = diag(+1, -1))."""
    mats = {
        "x": [[0, 1], [1, 0]],
        "y": [[0, -1j], [1j, 0]],
        "z": [[1, 0], [0, -1]],
        "identity": [[1, 0], [0, 1]],
    }
    if axis not in mats:
        raise ValidationError(f"unknown Pauli axis {axis!r}")
    return QOperator(HilbertLayout((2,)), np.array(mats[axis], dtype=complex))


def annihilation(n_f: int) -> QOperator:
    """Truncated-Fock annihilation operator, a[m, m+1] = sqrt(m+1)."""
    if n_f < 2:
        raise DimensionError(f"Fock truncation must be >= 2, got {n_f}")
    a = np.zeros((n_f, n_f), dtype=complex)
    for m in range(n_f - 1):
        a[m, m + 1] = math.sqrt(m + 1)
    return QOperator(HilbertLayout((n_f,)), a)


def creation(n_f: int) -> QOperator:
    return annihilation(n_f).dag()


def number_op(n_f: int) -> QOperator:
    a = annihilation(n_f)
    return a.dag() @ a


def embed(op: QOperator, layout: HilbertLayout, site: int) -> QOperator:
    """Lift a single-subsystem operator: I x ... x op x ... x I."""
    if not 0 <= site < layout.n_subsystems:
        raise ValidationError(f"site {site} out of range for layout {layout.dims}")
    if op.data.shape[0] != layout.dims[site]:
        raise DimensionError(
            f"operator dimension {op.data.shape[0]} does not match "
            f"layout.dims[{site}] = {layout.dims[site]}"
        )
    factors = [
        op.data if i == site else np.eye(d, dtype=complex)
        for i, d in enumerate(layout.dims)
    ]
    return QOperator(layout, reduce(np.kron, factors))


def basis_state(layout: HilbertLayout, levels: Sequence[int]) -> DensityMatrix:
    """Projector onto the product basis state |levels[0], levels[1], ...>."""
    if len(levels) != layout.n_subsystems:
        raise ValidationError("one level index per subsystem required")
    for lvl, d in zip(levels, layout.dims):
        if not 0 <= lvl < d:
            raise ValidationError(f"level {lvl} out of range for dimension {d}")
    idx = 0
    for lvl, d in zip(levels, layout.dims):
        idx = idx * d + lvl
    rho = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
    rho[idx, idx] = 1.0
    return DensityMatrix(layout, rho)


def partial_trace_array(
    data: np.ndarray, dims: Sequence[int], keep: Iterable[int]
) -> np.ndarray:
    """Partial trace on a raw matrix; no DensityMatrix validation."""
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(set(keep))
    if not keep:
        raise ValidationError("keep set must be nonempty")
    if any(i < 0 or i >= n for i in keep):
        raise ValidationError(f"keep indices {keep} out of range for {n} subsystems")
    drop = [i for i in range(n) if i not in keep]
    t = data.reshape(dims + dims)
    perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    t = t.transpose(perm)
    dk = math.prod(dims[i] for i in keep)
    dd = math.prod(dims[i] for i in drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.trace(t, axis1=1, axis2=3)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the kept subsystems (layout updated)."""
    keep = sorted(set(keep))
    reduced = partial_trace_array(rho.data, rho.layout.dims, keep)
    new_layout = HilbertLayout(tuple(rho.layout.dims[i] for i in keep))
    return DensityMatrix(new_layout, reduced)


def bose_occupation(omega: float, T: float) -> float:
    """Bose-Einstein occupation n(omega) at temperature T (omega in cm^-1)."""
    if omega <= 0:
        raise ValidationError(f"frequency must be positive, got {omega}")
    if T < 0:
        raise ValidationError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return 0.0
    x = omega / (K_B * T)
    return 1.0 / math.expm1(x)


def thermal_state(omega: float, T: float, n_f: int) -> DensityMatrix:
    """Gibbs state of a truncated harmonic mode, p_m ~ exp(-m omega / kT)."""
    if omega <= 0:
        raise ValidationError(f"frequency must be positive, got {omega}")
    if T < 0:
        raise ValidationError(f"temperature must be >= 0, got {T}")
    if n_f < 2:
        raise DimensionError(f"Fock truncation must be >= 2, got {n_f}")
    m = np.arange(n_f)
    if T == 0:
        p = np.zeros(n_f)
        p[0] = 1.0
    else:
        w = np.exp(-m * omega / (K_B * T))
        p = w / w.sum()
    return DensityMatrix(HilbertLayout((n_f,)), np.diag(p.astype(complex)))


def von_neumann_entropy(rho: DensityMatrix | np.ndarray, clamp_tol: float = PSD_TOL) -> float:
    """S = -sum lambda ln lambda in nats; eigenvalues in [-clamp_tol, 0) are
    clamped to zero, anything below -clamp_tol raises."""
    data = rho.data if isinstance(rho, QOperator) else np.asarray(rho)
    lam = np.linalg.eigvalsh(data)
    if lam[0] < -clamp_tol:
        raise NumericalError(
            f"eigenvalue {lam[0]} below -{clamp_tol}: positivity violation"
        )
    lam = np.clip(lam, 0.0, None)
    nz = lam[lam > 0]
    return float(-np.sum(nz * np.log(nz)))


def mutual_information(
    rho: DensityMatrix,
    split: tuple[Iterable[int], Iterable[int]],
    clamp_tol: float = PSD_TOL,
) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) for a bipartition of the layout."""
    return mutual_information_array(rho.data, rho.layout.dims, split, clamp_tol)


def mutual_information_array(
    data: np.ndarray,
    dims: Sequence[int],
    split: tuple[Iterable[int], Iterable[int]],
    clamp_tol: float = PSD_TOL,
) -> float:
    """mutual_information on a raw matrix; no DensityMatrix validation."""
    group_a = sorted(set(split[0]))
    group_b = sorted(set(split[1]))
    n = len(dims)
    if not group_a or not group_b:
        raise ValidationError("both groups of the split must be nonempty")
    if sorted(group_a + group_b) != list(range(n)):
        raise ValidationError(
            f"split {split} is not a partition of the {n} subsystems"
        )
    rho_a = partial_trace_array(data, dims, group_a)
    rho_b = partial_trace_array(data, dims, group_b)
    s_a = von_neumann_entropy(rho_a, clamp_tol)
    s_b = von_neumann_entropy(rho_b, clamp_tol)
    s_ab = von_neumann_entropy(data, clamp_tol)
    mi = s_a + s_b - s_ab
    if mi < 0:
        window = max(PSD_TOL, clamp_tol)
        if mi < -window:
            raise NumericalError(f"mutual information {mi} below -{window}")
        mi = 0.0
    return mi
