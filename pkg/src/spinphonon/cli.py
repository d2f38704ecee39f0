"""Command-line front end: project -> rates -> evolve -> analyze.

Exit codes: 0 success, 2 validation error, 3 numerical abort.
"""

from __future__ import annotations

import functools
import sys

import click
import numpy as np

from . import analysis, fileio, pipeline
from .dynamics import Trajectory
from .core import HilbertLayout
from .errors import NumericalError, ValidationError
from .projection import RawVibrationalModel, project
from .rates import RateRequest, relaxation_rate

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except NumericalError as exc:
            click.echo(f"numerical abort: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except FileNotFoundError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)

    return wrapper


@click.group()
def main():
    """Spin-phonon embedding pipeline."""


@main.command("project")
@click.argument("freqs_file", type=click.Path())
@click.argument("coupling_file", type=click.Path())
@click.option("--rank-tol", default=1e-8, show_default=True)
@click.option("--b-ref", "b_ref", default=1.0, show_default=True,
              help="Field (T) at which the couplings were evaluated.")
@click.option("--out", required=True, type=click.Path())
@_guarded
def cmd_project(freqs_file, coupling_file, rank_tol, b_ref, out):
    """Decompose a normal-mode model into primary + residual coordinates."""
    freqs = fileio.read_frequencies(freqs_file)
    coupling = fileio.read_coupling(coupling_file, freqs.size)
    model = RawVibrationalModel(freqs, coupling, b_ref)
    result = project(model, rank_tol)
    cfg_hash = fileio.config_hash(
        {
            "freqs": freqs.tolist(),
            "coupling": coupling.tolist(),
            "rank_tol": rank_tol,
            "b_ref": b_ref,
        }
    )
    fileio.write_projection(result, out, cfg_hash)
    from .projection import svd_coupling

    _, sigma, _ = svd_coupling(coupling)
    click.echo(f"primary modes: {result.n_primary}")
    click.echo("singular values: " + " ".join(f"{s:.6g}" for s in sigma))
    click.echo(
        "primary frequencies (cm^-1): "
        + " ".join(f"{w:.6g}" for w in result.primary_freqs)
    )


def _parse_grid(spec: str) -> np.ndarray:
    try:
        parts = [float(p) for p in spec.split(":")]
    except ValueError:
        raise ValidationError(f"cannot parse grid {spec!r}; use start:stop:step") from None
    if len(parts) != 3 or parts[2] <= 0:
        raise ValidationError(f"cannot parse grid {spec!r}; use start:stop:step")
    start, stop, step = parts
    n = int(round((stop - start) / step)) + 1
    grid = start + step * np.arange(n)
    return grid[grid <= stop + 1e-9 * step]


@main.command("rates")
@click.argument("projection_file", type=click.Path())
@click.option("--temperature", "-t", type=float, default=None, help="Single T (K).")
@click.option("--t-grid", default=None, help="Grid start:stop:step in K.")
@click.option("--sigma", default=10.0, show_default=True, help="Broadening (cm^-1).")
@click.option("--lineshape", default="gaussian", show_default=True,
              type=click.Choice(["gaussian", "lorentzian"]))
@click.option("--out", required=True, type=click.Path())
@_guarded
def cmd_rates(projection_file, temperature, t_grid, sigma, lineshape, out):
    """Golden-rule relaxation rates of the primary modes."""
    if (temperature is None) == (t_grid is None):
        raise ValidationError("specify exactly one of --temperature and --t-grid")
    proj = fileio.read_projection(projection_file)
    grid = np.array([temperature]) if temperature is not None else _parse_grid(t_grid)
    if grid.size == 0:
        raise ValidationError("temperature grid is empty")
    if np.any(np.diff(grid) <= 0) and grid.size > 1:
        raise ValidationError("temperature grid must be strictly ascending")
    P = proj.n_primary
    cols = (
        ["temperature_K"]
        + [f"rate_{k}_per_ps" for k in range(1, P + 1)]
        + [f"lifetime_{k}_ps" for k in range(1, P + 1)]
    )
    rows = []
    for T in grid:
        req = RateRequest(proj, float(T), sigma, lineshape)
        rates = [relaxation_rate(req, k) for k in range(P)]
        lifetimes = [1.0 / r if r > 0 else np.inf for r in rates]
        rows.append([T] + rates + lifetimes)
    cfg_hash = fileio.config_hash(
        {
            "projection": fileio.projection_to_dict(proj),
            "T_grid": grid.tolist(),
            "sigma": sigma,
            "lineshape": lineshape,
        }
    )
    fileio.write_csv(out, cols, rows, cfg_hash)
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command("evolve")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", default=None, type=click.Path(), help="Trajectory CSV path.")
@click.option("--store-states", is_flag=True, help="Also write the state archive.")
@click.option("--stride", default=None, type=int, help="Override record stride.")
@click.option("--convergence-check", is_flag=True,
              help="Rerun with halved dt and report the max deviation.")
@_guarded
def cmd_evolve(config_path, out, store_states, stride, convergence_check):
    """Propagate the spin + primary-mode density matrix."""
    cfg = pipeline.load_config(config_path)
    out = out or cfg.raw.get("output", {}).get("trajectory_csv", "trajectory.csv")
    if stride is not None:
        cfg.record_stride = stride
    traj, meta = pipeline.run_simulation(cfg, store_states=store_states)
    cols, rows = pipeline.trajectory_rows(traj)
    fileio.write_csv(out, cols, rows, meta["cfg_hash"])
    click.echo(f"wrote trajectory ({len(rows)} records) to {out}")
    if store_states:
        archive = cfg.raw.get("output", {}).get("state_archive", out + ".states")
        fileio.write_state_archive(archive, traj.times, traj.states, traj.stride)
        click.echo(f"wrote state archive to {archive}")
    if convergence_check:
        traj_b, _ = pipeline.run_simulation(
            cfg, dt=cfg.dt_ps / 2.0, stride=cfg.record_stride * 2
        )
        dev = pipeline.max_observable_deviation(traj, traj_b)
        click.echo(f"convergence check: max observable deviation {dev:.3e}")


def _rebuild_trajectory(cfg, cols, data) -> Trajectory:
    """Reconstruct a population-level Trajectory from an evolve CSV."""
    P = sum(1 for c in cols if c.endswith("_rho00") and c.startswith("mode"))
    n_f = cfg.fock_truncation
    layout = HilbertLayout((2,) + (n_f,) * P)
    n = data.shape[0]
    times = data[:, cols.index("t_ps")]
    levels = cfg.initial_levels or [0] * (P + 1)
    pops = []
    spin_pop = np.zeros((n, 2))
    spin_pop[:, 0] = data[:, cols.index("spin_rho11")]
    spin_pop[:, 1] = 1.0 - spin_pop[:, 0]
    pops.append(spin_pop)
    for k in range(1, P + 1):
        pk = np.zeros((n, n_f))
        pk[:, 0] = data[:, cols.index(f"mode{k}_rho00")]
        if levels[k] != 0:
            pk[0, :] = 0.0
            pk[0, levels[k]] = 1.0
        pops.append(pk)
    mi = {}
    for k in range(1, P + 1):
        name = f"MI_spin_mode{k}"
        if name in cols:
            mi[k] = data[:, cols.index(name)]
    return Trajectory(
        layout=layout,
        times=times,
        populations=pops,
        purity=data[:, cols.index("purity")],
        trace_err=data[:, cols.index("trace_err")],
        energy=np.zeros(n),
        mutual_information=mi,
        states=None,
        dt=cfg.dt_ps,
        stride=cfg.record_stride,
    )


GNUPLOT_TEMPLATE = """\
# gnuplot script generated by spinphonon v{version} (config_hash={cfg_hash})
set datafile separator ','
set datafile commentschars '#'
set terminal pngcairo size 1200,900
set output '{prefix}_figures.png'
set multiplot layout 2,2 title 'spin-phonon dynamics'
set xlabel 't (ps)'
set ylabel 'delta rho'
plot '{traj_csv}' using 1:(column(2)-{spin0}) with lines title 'spin rho11 - rho11(0)'
set ylabel 'population'
plot {population_plots}
set ylabel 'delta rho (detrended)'
plot {detrend_plots}
set ylabel 'I(A:B) (nats)'
plot {mi_plots}
unset multiplot
"""


@main.command("analyze")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--trajectory", "traj_csv", required=True, type=click.Path())
@click.option("--states", "archive_path", default=None, type=click.Path())
@click.option("--mutual-information", "want_mi", is_flag=True,
              help="Compute MI series from the state archive.")
@click.option("--out", "prefix", default="analysis", show_default=True)
@_guarded
def cmd_analyze(config_path, traj_csv, archive_path, want_mi, prefix):
    """Detrended populations, MI series, dominant periods and a plot script."""
    cfg = pipeline.load_config(config_path)
    cols, data = fileio.read_csv(traj_csv)
    traj = _rebuild_trajectory(cfg, cols, data)
    P = traj.layout.n_subsystems - 1
    freqs, _, lifetimes = pipeline.resolve_primary_system(cfg)

    if want_mi and archive_path is None and not traj.mutual_information:
        raise ValidationError(
            "mutual information requested but no state archive or MI columns given"
        )
    if archive_path is not None:
        a_times, states, _ = fileio.read_state_archive(archive_path)
        if states.shape[1] != traj.layout.total_dim:
            raise ValidationError(
                f"archive dimension {states.shape[1]} does not match config "
                f"layout dimension {traj.layout.total_dim}"
            )
        if a_times.shape != traj.times.shape or np.max(np.abs(a_times - traj.times)) > 1e-9:
            raise ValidationError("archive time grid does not match trajectory CSV")
        traj.states = states

    out_cols = ["t_ps"]
    out_series = [traj.times]
    period_rows = []

    for k in range(1, P + 1):
        if np.isfinite(lifetimes[k - 1]):
            series = analysis.detrend_thermal(
                traj, k, float(freqs[k - 1]), cfg.temperature_K,
                float(lifetimes[k - 1]), cfg.fock_truncation,
            )
        else:
            series = analysis.delta_rho_initial(
                analysis.population_series(traj, k, 0)
            )
        out_cols.append(series.label)
        out_series.append(series.values)
        try:
            period_rows.append((series.label, analysis.dominant_period(series)))
        except ValidationError:
            period_rows.append((series.label, np.nan))

    if want_mi or traj.mutual_information or traj.states is not None:
        for k in range(1, P + 1):
            try:
                mi = analysis.mutual_info_series(traj, k)
            except ValidationError:
                continue
            out_cols.append(mi.label)
            out_series.append(mi.values)

    rows = list(zip(*out_series))
    fileio.write_csv(prefix + ".csv", out_cols, rows, cfg.cfg_hash)

    with open(prefix + "_periods.csv", "w") as fh:
        fh.write(fileio.comment_header(cfg.cfg_hash))
        fh.write("series,dominant_period_ps\n")
        for label, period in period_rows:
            fh.write(f"{label},{fileio.format_float(period)}\n")
            shown = "none" if np.isnan(period) else f"{period:.4g} ps"
            click.echo(f"dominant period of {label}: {shown}")

    detrend_cols = [c for c in out_cols if c.startswith("detrended") or c.startswith("delta")]
    mi_cols = [c for c in out_cols if c.startswith("MI_")]
    analysis_csv = prefix + ".csv"

    def plot_list(names, src):
        if not names:
            return "0 title 'none'"
        return ", ".join(
            f"'{src}' using 1:{out_cols.index(n) + 1} with lines title '{n}'"
            for n in names
        )

    pop_cols = [f"mode{k}_rho00" for k in range(1, P + 1)]
    pop_plots = ", ".join(
        f"'{traj_csv}' using 1:{cols.index(n) + 1} with lines title '{n}'"
        for n in pop_cols
    )
    script = GNUPLOT_TEMPLATE.format(
        version=fileio.TOOL_VERSION,
        cfg_hash=cfg.cfg_hash,
        prefix=prefix,
        traj_csv=traj_csv,
        spin0=fileio.format_float(float(data[0, cols.index("spin_rho11")])),
        population_plots=pop_plots or "0 title 'none'",
        detrend_plots=plot_list(detrend_cols, analysis_csv),
        mi_plots=plot_list(mi_cols, analysis_csv),
    )
    with open(prefix + ".gp", "w") as fh:
        fh.write(script)
    click.echo(f"wrote {analysis_csv}, {prefix}_periods.csv and {prefix}.gp")


if __name__ == "__main__":
    main()
