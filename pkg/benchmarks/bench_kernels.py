"""Benchmark the compiled RK4 kernel against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--steps N]

Times fixed-step RK4 Lindblad propagation of the dissipative reference model
(spin + three primary modes) at two Fock truncations and checks that the two
backends agree to round-off.
"""

import argparse
import time

import numpy as np
import scipy.sparse as sp

from spinphonon import SpinParameters, basis_state, build_model
from spinphonon import kernels
from spinphonon.dynamics import _drift_matrix


def build(n_f):
    couplings = np.array([[0.15, 0.35, 0.12], [0.0] * 3, [0.0] * 3])
    model = build_model(
        SpinParameters((1.987,) * 3, (0.0, 0.0, 200.0)),
        (183.0, 115.0, 108.0), couplings, n_f,
        (43.3, 127.1, 2879.1), 65.0,
    )
    rho0 = basis_state(model.layout, [0] * 4).data
    A = sp.csr_matrix(_drift_matrix(model))
    c_ops = [sp.csr_matrix(c.data) for c, _ in model.collapse_ops]
    return A, c_ops, rho0


def time_backend(backend, A, c_ops, rho0, dt, n_steps):
    plan = kernels.make_plan(A, c_ops, backend=backend)
    # warm up (allocations, attribute caching)
    kernels.run_steps(plan, rho0, dt, 2)
    t0 = time.perf_counter()
    out = kernels.run_steps(plan, rho0, dt, n_steps)
    elapsed = time.perf_counter() - t0
    return elapsed / n_steps, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=200,
                        help="RK4 steps per timed run (default 200)")
    args = parser.parse_args()

    for n_f, dt in ((4, 0.01), (6, 0.00625)):
        A, c_ops, rho0 = build(n_f)
        d = A.shape[0]
        print(f"n_f = {n_f} (dimension {d}), dt = {dt} ps, {args.steps} steps")
        results = {}
        for backend in ("cython", "python"):
            try:
                per_step, out = time_backend(backend, A, c_ops, rho0, dt, args.steps)
            except ImportError:
                print(f"  {backend:>7}: not available")
                continue
            results[backend] = out
            print(f"  {backend:>7}: {per_step * 1e3:8.3f} ms/step")
        if len(results) == 2:
            diff = np.max(np.abs(results["cython"] - results["python"]))
            print(f"  backend agreement: max |diff| = {diff:.2e}")
        print()


if __name__ == "__main__":
    main()
