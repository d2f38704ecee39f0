"""Hamiltonian assembly and Lindblad propagation of the spin + primary-mode
density matrix.

The Zeeman term uses spin operators S_alpha = sigma_alpha / 2 (so the level
splitting is g mu_B B) while the spin-phonon coupling uses the bare Pauli
matrices; the flag ``zeeman_spin_half`` documents and controls this
convention.  Propagation is fixed-step classical RK4 on the matrix-valued
right-hand side, with re-Hermitization and invariant checks at recorded
steps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .constants import CM1_TO_RAD_PER_PS, MU_B
from .core import (
    DensityMatrix,
    HilbertLayout,
    QOperator,
    annihilation,
    bose_occupation,
    embed,
    mutual_information_array,
    partial_trace_array,
    pauli,
)
from .errors import DimensionError, PropagationError, ValidationError

__all__ = [
    "SpinParameters",
    "LindbladModel",
    "Trajectory",
    "build_hamiltonian",
    "build_collapse_ops",
    "build_model",
    "lindblad_rhs",
    "propagate",
]

DIM_CAP = 4096
TRACE_ABORT = 1e-6
POSITIVITY_TOL = 1e-7
# Classical RK4 is stable on the imaginary axis only for |omega| dt < 2 sqrt(2);
# the fastest coherence oscillates at the full spectral spread of H, so the
# step clamp uses that spread with a small safety margin.
RK4_STABILITY_MARGIN = 2.75


@dataclass(frozen=True)
class SpinParameters:
    """Diagonal g-tensor (dimensionless) and magnetic field vector (Tesla)."""

    g_diag: tuple[float, float, float]
    B: tuple[float, float, float]

    def __post_init__(self):
        g = tuple(float(x) for x in self.g_diag)
        B = tuple(float(x) for x in self.B)
        if len(g) != 3 or len(B) != 3:
            raise ValidationError("g_diag and B must each have 3 components")
        if any(not 0 < gi < 4 for gi in g):
            raise ValidationError(f"g components must lie in (0, 4), got {g}")
        object.__setattr__(self, "g_diag", g)
        object.__setattr__(self, "B", B)


@dataclass
class LindbladModel:
    """Assembled system Hamiltonian (cm^-1) plus labelled collapse operators
    with their ps^-1/2 prefactors folded in."""

    layout: HilbertLayout
    H: QOperator
    collapse_ops: list[tuple[QOperator, str]]
    temperature: float

    def __post_init__(self):
        if np.max(np.abs(self.H.data - self.H.data.conj().T)) > 1e-10:
            raise ValidationError("system Hamiltonian is not Hermitian within 1e-10")


@dataclass
class Trajectory:
    """Recorded time grid, per-subsystem populations and scalar observables
    of one propagation run."""

    layout: HilbertLayout
    times: np.ndarray  # ps
    populations: list[np.ndarray]  # per subsystem, shape (n_rec, dims[i])
    purity: np.ndarray
    trace_err: np.ndarray
    energy: np.ndarray  # <H> in cm^-1
    mutual_information: dict[int, np.ndarray] = field(default_factory=dict)
    states: np.ndarray | None = None  # (n_rec, d, d) when stored
    dt: float = 0.0
    stride: int = 1


def build_hamiltonian(
    spin: SpinParameters,
    primary_freqs,
    primary_couplings,
    n_f: int,
    zeeman_spin_half: bool = True,
    dim_cap: int = DIM_CAP,
) -> QOperator:
    """H_s = Zeeman + spin-phonon coupling + harmonic mode terms, in cm^-1.

    Layout is [2, n_f, ..., n_f] with one Fock factor per primary mode.
    """
    freqs = np.atleast_1d(np.asarray(primary_freqs, dtype=float))
    g_prime = np.asarray(primary_couplings, dtype=float)
    P = freqs.size
    if g_prime.shape != (3, P):
        raise DimensionError(f"primary couplings must be 3 x {P}, got {g_prime.shape}")
    if np.any(freqs <= 0):
        raise ValidationError("primary frequencies must be positive")
    if n_f < 2:
        raise DimensionError(f"Fock truncation must be >= 2, got {n_f}")
    layout = HilbertLayout((2,) + (n_f,) * P)
    if layout.total_dim > dim_cap:
        raise DimensionError(
            f"total dimension {layout.total_dim} exceeds cap {dim_cap}"
        )

    d = layout.total_dim
    H = np.zeros((d, d), dtype=complex)
    spin_scale = 0.5 if zeeman_spin_half else 1.0
    for alpha, axis in enumerate("xyz"):
        coeff = MU_B * spin.B[alpha] * spin.g_diag[alpha] * spin_scale
        if coeff != 0.0:
            H += coeff * embed(pauli(axis), layout, 0).data

    a_ops = [embed(annihilation(n_f), layout, 1 + k).data for k in range(P)]
    for k in range(P):
        x_k = a_ops[k] + a_ops[k].conj().T
        for alpha, axis in enumerate("xyz"):
            if g_prime[alpha, k] != 0.0:
                H += g_prime[alpha, k] * embed(pauli(axis), layout, 0).data @ x_k
        H += freqs[k] * (a_ops[k].conj().T @ a_ops[k] + 0.5 * np.eye(d))
    return QOperator(layout, H)


def build_collapse_ops(
    layout: HilbertLayout,
    rates,
    mode_freqs,
    T: float,
) -> list[tuple[QOperator, str]]:
    """Thermal collapse operators C_{k,-} and C_{k,+} for each primary mode.

    rates are 1/T_vib,k in ps^-1; prefactors are in ps^-1/2 so the Lindblad
    dissipator is directly in ps^-1.
    """
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    freqs = np.atleast_1d(np.asarray(mode_freqs, dtype=float))
    P = layout.n_subsystems - 1
    if rates.size != P or freqs.size != P:
        raise DimensionError(f"need one rate and one frequency per mode ({P})")
    if np.any(rates < 0):
        raise ValidationError("rates must be nonnegative")
    ops = []
    for k in range(P):
        if rates[k] == 0.0:
            continue
        n_k = bose_occupation(freqs[k], T)
        a_k = embed(annihilation(layout.dims[1 + k]), layout, 1 + k)
        down = math.sqrt((n_k + 1.0) * rates[k])
        ops.append((down * a_k, f"{k + 1},-"))
        if n_k > 0.0:
            up = math.sqrt(n_k * rates[k])
            ops.append((up * a_k.dag(), f"{k + 1},+"))
    return ops


def build_model(
    spin: SpinParameters,
    primary_freqs,
    primary_couplings,
    n_f: int,
    lifetimes,
    temperature: float,
    zeeman_spin_half: bool = True,
    dim_cap: int = DIM_CAP,
) -> LindbladModel:
    """Convenience assembly of a full LindbladModel from lifetimes in ps."""
    freqs = np.atleast_1d(np.asarray(primary_freqs, dtype=float))
    lifetimes = np.atleast_1d(np.asarray(lifetimes, dtype=float))
    if np.any(lifetimes <= 0):
        raise ValidationError("lifetimes must be positive (use inf for no decay)")
    rates = np.where(np.isinf(lifetimes), 0.0, 1.0 / lifetimes)
    H = build_hamiltonian(
        spin, freqs, primary_couplings, n_f, zeeman_spin_half, dim_cap
    )
    layout = H.layout
    c_ops = build_collapse_ops(layout, rates, freqs, temperature)
    return LindbladModel(layout, H, c_ops, temperature)


def _drift_matrix(model: LindbladModel) -> np.ndarray:
    A = -1j * CM1_TO_RAD_PER_PS * model.H.data
    for c, _ in model.collapse_ops:
        A = A - 0.5 * (c.data.conj().T @ c.data)
    return A


def lindblad_rhs(model: LindbladModel, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """d rho / dt in ps^-1; exact Lindblad form, Hermitian within round-off."""
    data = rho.data if isinstance(rho, QOperator) else np.asarray(rho, dtype=complex)
    d = model.layout.total_dim
    if data.shape != (d, d):
        raise DimensionError(f"state shape {data.shape} does not match dimension {d}")
    H = model.H.data
    out = -1j * CM1_TO_RAD_PER_PS * (H @ data - data @ H)
    for c, _ in model.collapse_ops:
        cd = c.data
        cdc = cd.conj().T @ cd
        out += cd @ data @ cd.conj().T - 0.5 * (cdc @ data + data @ cdc)
    return out


def _record_observables(
    layout: HilbertLayout, rho: np.ndarray, H: np.ndarray, mi_modes
):
    pops = [
        np.real(np.diag(partial_trace_array(rho, layout.dims, [i])))
        for i in range(layout.n_subsystems)
    ]
    purity = float(np.real(np.sum(rho * rho.conj())))
    trace_err = abs(float(np.real(np.trace(rho))) - 1.0)
    energy = float(np.real(np.sum(H.T * rho)))
    mi = {}
    for k in mi_modes:
        sub = partial_trace_array(rho, layout.dims, [0, k])
        mi[k] = mutual_information_array(
            sub, (2, layout.dims[k]), ([0], [1]), clamp_tol=POSITIVITY_TOL
        )
    return pops, purity, trace_err, energy, mi


def propagate(
    model: LindbladModel,
    rho0: DensityMatrix,
    t_max: float,
    dt: float,
    store_states: bool = False,
    stride: int = 100,
    mi_modes=(),
    check_positivity: bool = True,
    backend: str | None = None,
) -> Trajectory:
    """Fixed-step RK4 integration of the Lindblad equation.

    Observables are recorded every ``stride`` steps (and at the final step);
    the state is re-Hermitized at each recorded step.  Trace drift beyond
    1e-6 or positivity violation beyond 1e-7 aborts with PropagationError.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    if rho0.layout.dims != model.layout.dims:
        raise DimensionError("initial state layout does not match model")
    evals = np.linalg.eigvalsh(model.H.data)
    spread = float(evals[-1] - evals[0])
    if spread > 0.0:
        dt_max = RK4_STABILITY_MARGIN / (CM1_TO_RAD_PER_PS * spread)
        if dt > dt_max:
            warnings.warn(
                f"dt = {dt} ps exceeds the RK4 stability bound {dt_max:.3e} ps "
                f"for the Hamiltonian spectral spread {spread:.1f} cm^-1; clamping",
                stacklevel=2,
            )
            dt = dt_max

    n_steps = max(1, int(round(t_max / dt)))
    A = _drift_matrix(model)
    plan = kernels.make_plan(
        sp.csr_matrix(A), [sp.csr_matrix(c.data) for c, _ in model.collapse_ops],
        backend=backend,
    )

    layout = model.layout
    mi_modes = tuple(mi_modes)
    for k in mi_modes:
        if not 1 <= k < layout.n_subsystems:
            raise ValidationError(f"mutual-information mode index {k} out of range")

    rho = np.array(rho0.data, dtype=complex, order="C")
    times, purities, trace_errs, energies = [], [], [], []
    pops: list[list[np.ndarray]] = [[] for _ in layout.dims]
    mi_series: dict[int, list[float]] = {k: [] for k in mi_modes}
    states = [] if store_states else None

    def record(step: int):
        nonlocal rho
        rho = 0.5 * (rho + rho.conj().T)
        p, pur, terr, en, mi = _record_observables(layout, rho, model.H.data, mi_modes)
        if terr > TRACE_ABORT:
            raise PropagationError(
                f"trace drift {terr:.3e} exceeds {TRACE_ABORT} at step {step}", step
            )
        if check_positivity:
            lo = float(np.linalg.eigvalsh(rho)[0])
            if lo < -POSITIVITY_TOL:
                raise PropagationError(
                    f"negativity {lo:.3e} exceeds -{POSITIVITY_TOL} at step {step}",
                    step,
                )
        times.append(step * dt)
        for i, pi in enumerate(p):
            pops[i].append(pi)
        purities.append(pur)
        trace_errs.append(terr)
        energies.append(en)
        for k in mi_modes:
            mi_series[k].append(mi[k])
        if states is not None:
            states.append(rho.copy())

    record(0)
    step = 0
    while step < n_steps:
        seg = min(stride, n_steps - step)
        rho = kernels.run_steps(plan, rho, dt, seg)
        step += seg
        record(step)

    return Trajectory(
        layout=layout,
        times=np.array(times),
        populations=[np.array(p) for p in pops],
        purity=np.array(purities),
        trace_err=np.array(trace_errs),
        energy=np.array(energies),
        mutual_information={k: np.array(v) for k, v in mi_series.items()},
        states=np.array(states) if states is not None else None,
        dt=dt,
        stride=stride,
    )
