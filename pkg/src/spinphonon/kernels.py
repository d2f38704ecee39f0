"""Kernel backend selection.

The compiled Cython kernel is used when available; the numpy/scipy fallback
is selected otherwise, or when the environment variable
``SPINPHONON_PURE_PYTHON`` is set to a non-empty value.  Both backends share
the make_plan / run_steps contract and produce results that agree to
round-off.
"""

from __future__ import annotations

import os

from . import _rk4_py

if os.environ.get("SPINPHONON_PURE_PYTHON"):
    _impl = _rk4_py
    BACKEND = "python"
else:
    try:
        from . import _rk4_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _rk4_py
        BACKEND = "python"


def get_backend(name: str | None = None):
    """Return (module, backend_name); name in {None, 'cython', 'python'}."""
    if name is None:
        return _impl, BACKEND
    if name == "python":
        return _rk4_py, "python"
    if name == "cython":
        from . import _rk4_cy  # raises ImportError if not built

        return _rk4_cy, "cython"
    raise ValueError(f"unknown kernel backend {name!r}")


def make_plan(A, c_ops, backend: str | None = None):
    impl, _ = get_backend(backend)
    plan = impl.make_plan(A, c_ops)
    plan.impl = impl
    return plan


def run_steps(plan, rho, dt, n_steps):
    return plan.impl.run_steps(plan, rho, dt, n_steps)
