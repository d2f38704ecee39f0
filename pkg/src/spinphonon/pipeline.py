"""Configuration model and pipeline orchestration:
project -> rates -> evolve -> analyze."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fileio
from .core import basis_state
from .dynamics import SpinParameters, Trajectory, build_model, propagate
from .errors import ValidationError
from .projection import ProjectionResult, RawVibrationalModel, project, scale_to_field
from .rates import RateRequest, compute_rates

__all__ = ["SimulationConfig", "load_config", "run_simulation", "convergence_check"]


@dataclass
class SimulationConfig:
    g_diag: tuple[float, float, float]
    B_T: tuple[float, float, float]
    B_ref_T: float
    temperature_K: float
    fock_truncation: int
    t_max_ps: float
    dt_ps: float
    record_stride: int
    # exactly one vibrational input variant
    projection_file: str | None = None
    primary_freqs_cm1: np.ndarray | None = None
    primary_couplings_cm1: np.ndarray | None = None
    lifetimes_ps: np.ndarray | None = None
    frequencies_file: str | None = None
    coupling_file: str | None = None
    rank_tol: float = 1e-8
    lineshape: str = "gaussian"
    sigma_cm1: float = 10.0
    mutual_information: bool = False
    initial_levels: list[int] | None = None
    zeeman_spin_half: bool = True
    raw: dict = field(default_factory=dict)

    @property
    def cfg_hash(self) -> str:
        return fileio.config_hash(self.raw)

    @property
    def B_magnitude(self) -> float:
        return math.sqrt(sum(b * b for b in self.B_T))


def _parse_lifetime(x) -> float:
    if isinstance(x, str):
        if x.lower() == "inf":
            return math.inf
        raise ValidationError(f"cannot parse lifetime {x!r}")
    return float(x)


def load_config(path: str) -> SimulationConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(doc, source=path)


def config_from_dict(doc: dict, source: str = "<config>") -> SimulationConfig:
    def need(section: dict, key: str, where: str):
        if key not in section:
            raise ValidationError(f"{source}: missing {where}.{key}")
        return section[key]

    spin = need(doc, "spin", "")
    time_sec = need(doc, "time", "")
    vib = need(doc, "vibrational", "")

    variants = [k for k in ("projection_file", "primary", "normal_modes") if k in vib]
    if len(variants) != 1:
        raise ValidationError(
            f"{source}: vibrational must contain exactly one of projection_file, "
            f"primary, normal_modes (got {variants})"
        )

    cfg = SimulationConfig(
        g_diag=tuple(need(spin, "g_diag", "spin")),
        B_T=tuple(need(spin, "B_T", "spin")),
        B_ref_T=float(need(spin, "B_ref_T", "spin")),
        temperature_K=float(need(doc, "temperature_K", "")),
        fock_truncation=int(doc.get("fock_truncation", 4)),
        t_max_ps=float(need(time_sec, "t_max_ps", "time")),
        dt_ps=float(need(time_sec, "dt_ps", "time")),
        record_stride=int(time_sec.get("record_stride", 100)),
        raw=doc,
    )

    broad = doc.get("broadening", {})
    cfg.lineshape = broad.get("lineshape", "gaussian")
    cfg.sigma_cm1 = float(broad.get("sigma_cm1", 10.0))
    obs = doc.get("observables", {})
    cfg.mutual_information = bool(obs.get("mutual_information", False))
    cfg.initial_levels = doc.get("initial_levels")
    cfg.zeeman_spin_half = bool(doc.get("zeeman_spin_half", True))

    if variants[0] == "projection_file":
        cfg.projection_file = vib["projection_file"]
    elif variants[0] == "primary":
        prim = vib["primary"]
        cfg.primary_freqs_cm1 = np.array(need(prim, "freqs_cm1", "primary"), dtype=float)
        cfg.primary_couplings_cm1 = np.array(
            need(prim, "couplings_cm1", "primary"), dtype=float
        )
        cfg.lifetimes_ps = np.array(
            [_parse_lifetime(x) for x in need(prim, "lifetimes_ps", "primary")]
        )
        P = cfg.primary_freqs_cm1.size
        if cfg.primary_couplings_cm1.shape != (3, P):
            raise ValidationError(
                f"{source}: primary.couplings_cm1 must be 3 x {P}, "
                f"got {cfg.primary_couplings_cm1.shape}"
            )
        if cfg.lifetimes_ps.size != P:
            raise ValidationError(f"{source}: need one lifetime per primary mode")
    else:
        nm = vib["normal_modes"]
        cfg.frequencies_file = need(nm, "frequencies_file", "normal_modes")
        cfg.coupling_file = need(nm, "coupling_file", "normal_modes")
        cfg.rank_tol = float(nm.get("rank_tol", 1e-8))

    if cfg.temperature_K < 0:
        raise ValidationError(f"{source}: temperature must be >= 0")
    if cfg.t_max_ps <= 0 or cfg.dt_ps <= 0:
        raise ValidationError(f"{source}: t_max_ps and dt_ps must be positive")
    if cfg.B_ref_T <= 0:
        raise ValidationError(f"{source}: B_ref_T must be positive")
    return cfg


def resolve_primary_system(cfg: SimulationConfig):
    """Return (freqs, couplings at B, lifetimes) from whichever vibrational
    input variant the config carries."""
    scale = cfg.B_magnitude / cfg.B_ref_T
    if cfg.primary_freqs_cm1 is not None:
        return (
            cfg.primary_freqs_cm1,
            cfg.primary_couplings_cm1 * scale,
            cfg.lifetimes_ps,
        )
    if cfg.projection_file is not None:
        proj = fileio.read_projection(cfg.projection_file)
    else:
        freqs = fileio.read_frequencies(cfg.frequencies_file)
        coupling = fileio.read_coupling(cfg.coupling_file, freqs.size)
        proj = project(
            RawVibrationalModel(freqs, coupling, cfg.B_ref_T), cfg.rank_tol
        )
    proj = scale_to_field(proj, cfg.B_magnitude, cfg.B_ref_T)
    req = RateRequest(proj, cfg.temperature_K, cfg.sigma_cm1, cfg.lineshape)
    rates = compute_rates(req)
    return proj.primary_freqs, proj.primary_couplings, rates.lifetimes


def run_simulation(
    cfg: SimulationConfig,
    store_states: bool = False,
    stride: int | None = None,
    dt: float | None = None,
    n_f: int | None = None,
    backend: str | None = None,
) -> tuple[Trajectory, dict]:
    """Assemble the model from the config and propagate; returns the
    trajectory and a metadata dict."""
    freqs, couplings, lifetimes = resolve_primary_system(cfg)
    n_f = cfg.fock_truncation if n_f is None else n_f
    dt = cfg.dt_ps if dt is None else dt
    stride = cfg.record_stride if stride is None else stride

    spin = SpinParameters(cfg.g_diag, cfg.B_T)
    model = build_model(
        spin,
        freqs,
        couplings,
        n_f,
        lifetimes,
        cfg.temperature_K,
        zeeman_spin_half=cfg.zeeman_spin_half,
    )
    levels = cfg.initial_levels or [0] * model.layout.n_subsystems
    if len(levels) != model.layout.n_subsystems:
        raise ValidationError(
            f"initial_levels needs {model.layout.n_subsystems} entries"
        )
    rho0 = basis_state(model.layout, levels)
    P = model.layout.n_subsystems - 1
    mi_modes = tuple(range(1, P + 1)) if cfg.mutual_information else ()
    traj = propagate(
        model,
        rho0,
        cfg.t_max_ps,
        dt,
        store_states=store_states,
        stride=stride,
        mi_modes=mi_modes,
        backend=backend,
    )
    meta = {
        "primary_freqs_cm1": np.asarray(freqs, dtype=float),
        "lifetimes_ps": np.asarray(lifetimes, dtype=float),
        "n_f": n_f,
        "model": model,
        "cfg_hash": cfg.cfg_hash,
    }
    return traj, meta


def trajectory_rows(traj: Trajectory):
    """CSV header and rows: t_ps, spin_rho11, mode{k}_rho00..., purity,
    trace_err and MI columns when recorded."""
    P = traj.layout.n_subsystems - 1
    cols = ["t_ps", "spin_rho11"]
    cols += [f"mode{k}_rho00" for k in range(1, P + 1)]
    cols += ["purity", "trace_err"]
    mi_keys = sorted(traj.mutual_information)
    cols += [f"MI_spin_mode{k}" for k in mi_keys]
    rows = []
    for i, t in enumerate(traj.times):
        row = [t, traj.populations[0][i, 0]]
        row += [traj.populations[k][i, 0] for k in range(1, P + 1)]
        row += [traj.purity[i], traj.trace_err[i]]
        row += [traj.mutual_information[k][i] for k in mi_keys]
        rows.append(row)
    return cols, rows


def convergence_check(cfg: SimulationConfig, backend: str | None = None) -> float:
    """Rerun with halved dt and doubled stride; returns the maximum absolute
    deviation over all recorded observables."""
    traj_a, _ = run_simulation(cfg, backend=backend)
    traj_b, _ = run_simulation(
        cfg, dt=cfg.dt_ps / 2.0, stride=cfg.record_stride * 2, backend=backend
    )
    return max_observable_deviation(traj_a, traj_b)


def max_observable_deviation(traj_a: Trajectory, traj_b: Trajectory) -> float:
    if traj_a.times.shape != traj_b.times.shape:
        raise ValidationError("trajectories have different record grids")
    dev = 0.0
    for i in range(min(traj_a.layout.n_subsystems, traj_b.layout.n_subsystems)):
        na = traj_a.populations[i].shape[1]
        nb = traj_b.populations[i].shape[1]
        n = min(na, nb)
        dev = max(
            dev,
            float(
                np.max(
                    np.abs(traj_a.populations[i][:, :n] - traj_b.populations[i][:, :n])
                )
            ),
        )
    dev = max(dev, float(np.max(np.abs(traj_a.purity - traj_b.purity))))
    return dev
