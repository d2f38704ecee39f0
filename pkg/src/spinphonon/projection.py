"""SVD projection of the spin-phonon coupling into primary collective modes.

The 3 x M derivative-coupling matrix is decomposed so that at most three
"primary" collective coordinates carry all direct spin coupling; the
remaining "residual" coordinates couple only bilinearly to the primaries.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, NumericalError, ValidationError

__all__ = [
    "RawVibrationalModel",
    "ProjectionResult",
    "svd_coupling",
    "project",
    "scale_to_field",
]

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class RawVibrationalModel:
    """Normal-mode frequencies (cm^-1) and the 3 x M coupling matrix
    (cm^-1 per unit mass-weighted displacement, rows x/y/z), evaluated at
    ``reference_field`` Tesla."""

    frequencies: np.ndarray
    coupling: np.ndarray
    reference_field: float = 1.0

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        g = np.asarray(self.coupling, dtype=float)
        if freqs.ndim != 1 or freqs.size < 3:
            raise DimensionError("need at least 3 normal modes")
        if np.any(freqs <= 0):
            raise ValidationError("all normal-mode frequencies must be positive")
        if g.shape != (3, freqs.size):
            raise DimensionError(
                f"coupling must be 3 x {freqs.size}, got {g.shape}"
            )
        if self.reference_field <= 0:
            raise ValidationError("reference field must be positive")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "coupling", g)

    @property
    def n_modes(self) -> int:
        return self.frequencies.size


@dataclass(frozen=True)
class ProjectionResult:
    """Primary frequencies/couplings, residual frequencies, bilinear
    couplings (cm^-2) and the M x M orthogonal rotation from the original
    normal modes to (primary, residual) coordinates."""

    primary_freqs: np.ndarray  # cm^-1, shape (P,)
    primary_couplings: np.ndarray  # cm^-1, shape (3, P)
    residual_freqs: np.ndarray  # cm^-1, shape (M-P,)
    bilinear_couplings: np.ndarray  # cm^-2, shape (P, M-P)
    rotation: np.ndarray  # shape (M, M)

    def __post_init__(self):
        wk = np.atleast_1d(np.asarray(self.primary_freqs, dtype=float))
        gk = np.asarray(self.primary_couplings, dtype=float)
        wq = np.atleast_1d(np.asarray(self.residual_freqs, dtype=float))
        gam = np.asarray(self.bilinear_couplings, dtype=float)
        rot = np.asarray(self.rotation, dtype=float)
        p, q = wk.size, wq.size
        if gk.shape != (3, p):
            raise DimensionError(f"primary couplings must be 3 x {p}, got {gk.shape}")
        if gam.shape != (p, q):
            raise DimensionError(
                f"bilinear couplings must be {p} x {q}, got {gam.shape}"
            )
        if rot.shape != (p + q, p + q):
            raise DimensionError("rotation must be M x M")
        if np.any(wk <= 0) or np.any(wq <= 0):
            raise NumericalError("projected mode frequencies must be positive")
        if np.max(np.abs(rot.T @ rot - np.eye(p + q))) > ORTHO_TOL:
            raise NumericalError("rotation is not orthogonal within 1e-10")
        object.__setattr__(self, "primary_freqs", wk)
        object.__setattr__(self, "primary_couplings", gk)
        object.__setattr__(self, "residual_freqs", wq)
        object.__setattr__(self, "bilinear_couplings", gam)
        object.__setattr__(self, "rotation", rot)

    @property
    def n_primary(self) -> int:
        return self.primary_freqs.size

    @property
    def n_residual(self) -> int:
        return self.residual_freqs.size


def _fix_column_signs(V: np.ndarray, U: np.ndarray | None = None):
    """Make the largest-magnitude entry of each column of V positive,
    flipping the matching column of U to keep the product unchanged."""
    for j in range(V.shape[1]):
        idx = int(np.argmax(np.abs(V[:, j])))
        if V[idx, j] < 0:
            V[:, j] = -V[:, j]
            if U is not None:
                U[:, j] = -U[:, j]


def svd_coupling(g_prime: np.ndarray):
    """SVD of the 3 x M coupling matrix.

    Returns (U, singular_values, V) with U 3x3 orthogonal, the singular
    values descending and V holding M x 3 orthonormal columns; the sign
    convention makes the largest-magnitude entry of each V column positive.
    """
    g = np.asarray(g_prime, dtype=float)
    if g.ndim != 2 or g.shape[0] != 3 or g.shape[1] < 3:
        raise DimensionError(f"coupling must be 3 x M with M >= 3, got {g.shape}")
    U, s, Vt = np.linalg.svd(g, full_matrices=False)
    V = Vt.T.copy()
    U = U.copy()
    _fix_column_signs(V, U)
    return U, s, V


def _complete_orthogonal(V_p: np.ndarray) -> np.ndarray:
    """Complete orthonormal columns V_p to a full orthogonal M x M matrix by
    Gram-Schmidt against the identity basis (deterministic)."""
    m, p = V_p.shape
    cols = [V_p[:, j] for j in range(p)]
    for j in range(m):
        v = np.zeros(m)
        v[j] = 1.0
        for c in cols:
            v = v - np.dot(c, v) * c
        # second pass for numerical orthogonality
        for c in cols:
            v = v - np.dot(c, v) * c
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            cols.append(v / norm)
        if len(cols) == m:
            break
    if len(cols) != m:
        raise NumericalError("failed to complete orthogonal basis")
    return np.column_stack(cols)


def project(model: RawVibrationalModel, rank_tol: float = 1e-8) -> ProjectionResult:
    """Rotate the normal modes into primary + residual coordinates.

    The primary coordinates are the right-singular vectors of the coupling
    matrix with singular value above ``rank_tol`` times the largest; the
    force-constant matrix is rotated into that basis, the primary and
    residual blocks are separately re-diagonalized, and the off-diagonal
    block (in the re-diagonalized bases) becomes the bilinear coupling.
    """
    if not 0 < rank_tol < 1:
        raise ValidationError(f"rank_tol must be in (0, 1), got {rank_tol}")
    U, s, V = svd_coupling(model.coupling)
    if s[0] <= 0:
        raise ValidationError("coupling matrix is identically zero")
    P = int(np.sum(s > rank_tol * s[0]))
    M = model.n_modes

    R0 = _complete_orthogonal(V[:, :P])
    K = R0.T @ (model.frequencies[:, None] ** 2 * R0)  # R0^T diag(w^2) R0

    w2_p, W_p = np.linalg.eigh(K[:P, :P])
    if np.any(w2_p <= 0):
        raise NumericalError("unstable projected mode: nonpositive primary block")
    _fix_column_signs(W_p)

    if M - P > 0:
        w2_q, W_q = np.linalg.eigh(K[P:, P:])
        if np.any(w2_q <= 0):
            raise NumericalError("unstable projected mode: nonpositive residual block")
        _fix_column_signs(W_q)
        gamma = W_p.T @ K[:P, P:] @ W_q
    else:
        w2_q = np.zeros(0)
        W_q = np.zeros((0, 0))
        gamma = np.zeros((P, 0))

    rotation = R0.copy()
    rotation[:, :P] = R0[:, :P] @ W_p
    if M - P > 0:
        rotation[:, P:] = R0[:, P:] @ W_q

    primary_couplings = model.coupling @ rotation[:, :P]

    return ProjectionResult(
        primary_freqs=np.sqrt(w2_p),
        primary_couplings=primary_couplings,
        residual_freqs=np.sqrt(w2_q),
        bilinear_couplings=gamma,
        rotation=rotation,
    )


def scale_to_field(
    result: ProjectionResult, B_sim: float, B_ref: float
) -> ProjectionResult:
    """Rescale the spin-primary couplings linearly in the applied field."""
    if B_ref <= 0:
        raise ValidationError(f"reference field must be positive, got {B_ref}")
    factor = B_sim / B_ref
    return replace(result, primary_couplings=result.primary_couplings * factor)
