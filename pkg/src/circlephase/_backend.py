"""Kernel backend selection.

Importing this module picks the compiled Cython kernels when they are
available, falling back to the numpy implementations otherwise.  Set
CIRCLEPHASE_BACKEND=python to force the fallback (useful for benchmarking
and for debugging the extension).
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("CIRCLEPHASE_BACKEND", "auto").strip().lower()

if _requested in ("python", "py"):
    _impl = _kernels_py
elif _requested in ("auto", "", "cython", "c"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested in ("cython", "c"):
            raise ImportError(
                "CIRCLEPHASE_BACKEND=cython requested but the compiled "
                "extension is not installed"
            )
        _impl = _kernels_py
else:
    raise ValueError(f"unknown CIRCLEPHASE_BACKEND value: {_requested!r}")

BACKEND = _impl.BACKEND
bump_raw = _kernels_py.bump_raw
bump_pdf = _impl.bump_pdf
bump_cdf = _impl.bump_cdf
poly_eval = _impl.poly_eval
phase_eval = _impl.phase_eval
phase_deriv = _impl.phase_deriv
window_grid_moments = _impl.window_grid_moments
