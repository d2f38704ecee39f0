"""Pure-Python (numpy/scipy) RK4 kernel for the Lindblad right-hand side.

The right-hand side is evaluated in the "drift + jumps" form

    d rho/dt = A rho + rho A^dag + sum_j C_j rho C_j^dag

with A = -i H~ - 1/2 sum_j C_j^dag C_j (H~ already in rad/ps).  Because a
Hermitian rho stays Hermitian through every RK4 stage, rho A^dag is computed
as (A rho)^dag, halving the work.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class Plan:
    def __init__(self, A: sp.csr_matrix, c_ops: list[sp.csr_matrix]):
        self.A = A
        self.dim = A.shape[0]
        # Jump operators with at most one nonzero per row (scaled ladder
        # operators) contribute (C Y C^dag)_{ij} = c_i conj(c_j) Y_{m(i) m(j)},
        # a gather instead of two sparse-dense products.
        self.gather = []
        self.generic = []
        for c in c_ops:
            row_nnz = np.diff(c.indptr)
            if np.all(row_nnz <= 1):
                rows = np.flatnonzero(row_nnz == 1)
                cols = c.indices[c.indptr[rows]]
                vals = c.data[c.indptr[rows]]
                self.gather.append(
                    (np.ix_(rows, rows), np.ix_(cols, cols), np.outer(vals, vals.conj()))
                )
            else:
                self.generic.append(c)


def make_plan(A: sp.csr_matrix, c_ops) -> Plan:
    A = sp.csr_matrix(A, dtype=complex)
    c_list = [sp.csr_matrix(c, dtype=complex) for c in c_ops]
    return Plan(A, c_list)


def _rhs(plan: Plan, rho: np.ndarray) -> np.ndarray:
    m = plan.A @ rho
    out = m + m.conj().T
    for out_ix, in_ix, weights in plan.gather:
        out[out_ix] += weights * rho[in_ix]
    for c in plan.generic:
        t1 = c @ rho
        out += c @ t1.conj().T
    return out


def run_steps(plan: Plan, rho: np.ndarray, dt: float, n_steps: int) -> np.ndarray:
    """Advance rho by n_steps fixed RK4 steps; returns a new array."""
    rho = np.array(rho, dtype=complex, order="C")
    for _ in range(n_steps):
        k1 = _rhs(plan, rho)
        k2 = _rhs(plan, rho + 0.5 * dt * k1)
        k3 = _rhs(plan, rho + 0.5 * dt * k2)
        k4 = _rhs(plan, rho + dt * k3)
        rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return rho
