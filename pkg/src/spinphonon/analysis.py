"""Trajectory reduction: population series, deviations, thermal detrending,
mutual-information series and dominant oscillation periods."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HilbertLayout, basis_state, mutual_information_array, partial_trace_array
from .dynamics import POSITIVITY_TOL, LindbladModel, Trajectory, propagate
from .errors import ValidationError

__all__ = [
    "ObservableSeries",
    "population_series",
    "delta_rho_initial",
    "detrend_thermal",
    "mutual_info_series",
    "dominant_period",
]


@dataclass(frozen=True)
class ObservableSeries:
    times: np.ndarray  # ps
    values: np.ndarray
    label: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValidationError("times and values must have the same length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def population_series(traj: Trajectory, subsystem: int, level: int) -> ObservableSeries:
    """Diagonal element ``level`` of the reduced density matrix of one
    subsystem, per recorded step."""
    if not 0 <= subsystem < traj.layout.n_subsystems:
        raise ValidationError(f"subsystem {subsystem} out of range")
    if not 0 <= level < traj.layout.dims[subsystem]:
        raise ValidationError(f"level {level} out of range")
    values = traj.populations[subsystem][:, level]
    name = "spin" if subsystem == 0 else f"mode{subsystem}"
    return ObservableSeries(traj.times, values, f"{name}_rho{level}{level}")


def delta_rho_initial(series: ObservableSeries) -> ObservableSeries:
    """Deviation from the initial value, values[i] - values[0]."""
    if series.values.size == 0:
        raise ValidationError("series is empty")
    return ObservableSeries(
        series.times, series.values - series.values[0], f"delta_{series.label}"
    )


def _single_mode_reference(
    mode_freq: float,
    T: float,
    T_vib: float,
    n_f: int,
    initial_level: int,
    times: np.ndarray,
    dt: float,
    stride: int,
) -> np.ndarray:
    """Ground population of the mode propagated alone (its harmonic
    Hamiltonian plus its own thermal collapse operators, no spin)."""
    import math

    from .core import QOperator, annihilation, bose_occupation

    layout = HilbertLayout((n_f,))
    a = annihilation(n_f)
    H = QOperator(
        layout, mode_freq * (a.dag() @ a).data + 0.5 * mode_freq * np.eye(n_f)
    )
    n_th = bose_occupation(mode_freq, T)
    c_ops = [(math.sqrt((n_th + 1.0) / T_vib) * a, "1,-")]
    if n_th > 0:
        c_ops.append((math.sqrt(n_th / T_vib) * a.dag(), "1,+"))
    model = LindbladModel(layout, H, c_ops, T)
    rho0 = basis_state(layout, [initial_level])
    ref = propagate(
        model,
        rho0,
        t_max=times[-1],
        dt=dt,
        stride=stride,
        check_positivity=False,
    )
    if ref.times.shape != times.shape or np.max(np.abs(ref.times - times)) > 1e-9:
        raise ValidationError("reference propagation grid mismatch")
    return ref.populations[0][:, 0]


def detrend_thermal(
    traj: Trajectory,
    mode_k: int,
    mode_freq: float,
    T: float,
    T_vib_k: float,
    n_f: int,
) -> ObservableSeries:
    """Ground-population deviation of mode k from its mode-alone thermal
    relaxation profile, delta rho = rho_00(t) - rho_00^th(t)."""
    if not 1 <= mode_k < traj.layout.n_subsystems:
        raise ValidationError(f"mode index {mode_k} out of range")
    if not np.isfinite(T_vib_k) or T_vib_k <= 0:
        raise ValidationError("detrending requires a finite positive lifetime")
    raw = traj.populations[mode_k][:, 0]
    initial_level = int(np.argmax(traj.populations[mode_k][0]))
    ref = _single_mode_reference(
        mode_freq, T, T_vib_k, n_f, initial_level, traj.times, traj.dt, traj.stride
    )
    return ObservableSeries(traj.times, raw - ref, f"detrended_mode{mode_k}_rho00")


def mutual_info_series(traj: Trajectory, mode_k: int) -> ObservableSeries:
    """I(spin : mode k) per recorded step, tracing out the other modes."""
    if not 1 <= mode_k < traj.layout.n_subsystems:
        raise ValidationError(f"mode index {mode_k} out of range")
    if mode_k in traj.mutual_information:
        values = traj.mutual_information[mode_k]
    else:
        if traj.states is None:
            raise ValidationError(
                "mutual_info_series requires stored states or recorded MI"
            )
        dims = traj.layout.dims
        values = np.empty(len(traj.times))
        for i, rho in enumerate(traj.states):
            sub = partial_trace_array(rho, dims, [0, mode_k])
            values[i] = mutual_information_array(
                sub, (2, dims[mode_k]), ([0], [1]), clamp_tol=POSITIVITY_TOL
            )
    return ObservableSeries(traj.times, values, f"MI_spin_mode{mode_k}")


def dominant_period(series: ObservableSeries, band: tuple[float, float] | None = None) -> float:
    """Period (ps) of the largest non-DC FFT power peak, with parabolic
    interpolation; optionally restricted to a period window."""
    t = series.times
    v = series.values
    if v.size < 32:
        raise ValidationError("need at least 32 samples")
    steps = np.diff(t)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1e-30):
        raise ValidationError("time grid is not uniform")
    dt = float(steps[0])
    n = v.size
    power = np.abs(np.fft.rfft(v - np.mean(v))) ** 2
    freqs = np.fft.rfftfreq(n, d=dt)
    power[0] = 0.0
    mask = np.ones_like(power, dtype=bool)
    mask[0] = False
    if band is not None:
        lo, hi = band
        with np.errstate(divide="ignore"):
            periods = np.where(freqs > 0, 1.0 / np.where(freqs > 0, freqs, 1.0), np.inf)
        mask &= (periods >= lo) & (periods <= hi)
    if not np.any(mask) or np.max(power[mask]) <= 0:
        raise ValidationError("no non-DC peak found")
    idx = int(np.arange(power.size)[mask][np.argmax(power[mask])])
    # parabolic interpolation on log-safe power values
    if 0 < idx < power.size - 1 and power[idx - 1] > 0 and power[idx + 1] > 0:
        y0, y1, y2 = power[idx - 1], power[idx], power[idx + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    f_peak = (idx + shift) / (n * dt)
    if f_peak <= 0:
        raise ValidationError("no non-DC peak found")
    return 1.0 / f_peak
