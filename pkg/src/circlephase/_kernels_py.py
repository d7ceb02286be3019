"""Pure numpy implementations of the hot evaluation kernels.

The compiled extension (`circlephase._kernels`) exports the same functions
with identical semantics; `circlephase._backend` picks whichever is
available.  Everything here is vectorized over the evaluation points.

Conventions shared by both backends:
  * piecewise polynomials are given by `breaks` (P+1 sorted edges) and a
    padded complex coefficient matrix `coeffs` of shape (P, D+1), ascending
    powers of the global variable; evaluation is right-continuous and the
    last piece also covers its right edge,
  * the bump CDF table spans u in [-1, 1] on a uniform grid; between nodes
    it is interpolated with a cubic Hermite using the exact bump density as
    the slope.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def bump_raw(u):
    """exp(-1/(1-u^2)) inside (-1, 1), zero outside (unnormalized bump)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


def bump_pdf(u, c):
    """Normalized bump density c*exp(-1/(1-u^2))."""
    return c * bump_raw(u)


def bump_cdf(u, table, c):
    """CDF of the normalized bump, clamped to {0, 1} outside [-1, 1]."""
    u = np.asarray(u, dtype=float)
    n = table.shape[0] - 1
    dx = 2.0 / n
    out = np.empty_like(u)
    left = u <= -1.0
    right = u >= 1.0
    mid = ~(left | right)
    out[left] = 0.0
    out[right] = 1.0
    um = u[mid]
    pos = (um + 1.0) / dx
    idx = np.minimum(pos.astype(np.int64), n - 1)
    s = pos - idx
    x0 = -1.0 + idx * dx
    p0 = table[idx]
    p1 = table[idx + 1]
    m0 = bump_pdf(x0, c) * dx
    m1 = bump_pdf(x0 + dx, c) * dx
    s2 = s * s
    s3 = s2 * s
    out[mid] = (
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0
        + (s3 - 2.0 * s2 + s) * m0
        + (-2.0 * s3 + 3.0 * s2) * p1
        + (s3 - s2) * m1
    )
    return out


def poly_eval(breaks, coeffs, t):
    """Evaluate a padded piecewise polynomial at points t (complex output)."""
    t = np.asarray(t, dtype=float)
    idx = np.searchsorted(breaks, t, side="right") - 1
    idx = np.clip(idx, 0, coeffs.shape[0] - 1)
    out = np.zeros(t.shape, dtype=complex)
    for d in range(coeffs.shape[1] - 1, -1, -1):
        out = out * t + coeffs[idx, d]
    return out


def phase_eval(centers, widths, jumps, base, t, table, c):
    """Sum of mollified jumps: base + sum_k jumps[k]*Psi((t-centers[k])/widths[k])."""
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, float(base))
    for ck, wk, jk in zip(centers, widths, jumps):
        out += jk * bump_cdf((t - ck) / wk, table, c)
    return out


def phase_deriv(centers, widths, jumps, t, table, c):
    """Derivative of `phase_eval` (the table is unused but kept for API parity)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    for ck, wk, jk in zip(centers, widths, jumps):
        out += (jk / wk) * bump_pdf((t - ck) / wk, c)
    return out


def window_grid_moments(jump_locs, jump_sizes, jump_counts, width, fvals, nodes, weights, table, c):
    """Window moments of several functions against a family of window phases.

    jump_locs/jump_sizes: (n_w, J) padded per-phase mollified-jump data,
    jump_counts: (n_w,) number of valid jumps per phase, `width` the common
    mollifier width.  fvals: (n_f, N) function values at `nodes` with
    quadrature `weights`.  Returns the (n_w, n_f) complex moment matrix
    out[w, k] = sum_i weights[i] * fvals[k, i] * exp(i*theta_w(nodes[i])).
    """
    n_w = jump_locs.shape[0]
    out = np.empty((n_w, fvals.shape[0]), dtype=complex)
    for w in range(n_w):
        m = jump_counts[w]
        theta = phase_eval(jump_locs[w, :m], np.full(m, width), jump_sizes[w, :m], 0.0, nodes, table, c)
        ph = np.exp(1j * theta)
        out[w] = (fvals * ph[None, :]) @ weights
    return out
