"""Piecewise polynomial functions on [0,1], interval masks, and integration.

Inputs to the whole pipeline are complex-valued piecewise polynomials: they
are dense in L^1, integrate exactly, and every interior non-breakpoint is a
Lebesgue point, which is what the node-selection and approximate-identity
steps of the construction need.  Evaluation is right-continuous at
breakpoints (the last piece also covers t = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .quadrature import QuadratureConfig, adaptive_integrate

MAX_DEGREE = 12


def _as_coeff_matrix(pieces):
    """Pad per-piece ascending coefficient lists into one complex matrix."""
    rows = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in pieces]
    if any(r.ndim != 1 or r.size == 0 for r in rows):
        raise ValueError("every piece needs at least one coefficient")
    width = max(r.size for r in rows)
    if width - 1 > MAX_DEGREE:
        raise ValueError(f"piece degree exceeds {MAX_DEGREE}")
    mat = np.zeros((len(rows), width), dtype=complex)
    for i, r in enumerate(rows):
        mat[i, : r.size] = r
    return mat


@dataclass(frozen=True)
class PiecewiseComplexFunction:
    """Complex piecewise polynomial with ascending-power global coefficients.

    breakpoints: sorted edges, breakpoints[0] = 0 and breakpoints[-1] = 1;
    coeffs: (n_pieces, max_degree+1) padded coefficient matrix.
    """

    breakpoints: np.ndarray
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float, copy=True)
        cf = np.array(self.coeffs, dtype=complex, copy=True)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if cf.shape[0] != bp.size - 1:
            raise ValueError("piece count must match breakpoint intervals")
        if not np.all(np.isfinite(cf)):
            raise ValueError("coefficients must be finite")
        bp.flags.writeable = False
        cf.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coeffs", cf)

    @classmethod
    def from_pieces(cls, breakpoints, pieces):
        return cls(np.asarray(breakpoints, dtype=float), _as_coeff_matrix(pieces))

    @classmethod
    def constant(cls, value):
        return cls.from_pieces([0.0, 1.0], [[value]])

    @classmethod
    def polynomial(cls, coeffs):
        """Single-piece polynomial on [0,1] with ascending coefficients."""
        return cls.from_pieces([0.0, 1.0], [coeffs])

    def values(self, t):
        return _backend.poly_eval(self.breakpoints, self.coeffs, t)

    def __call__(self, t):
        return complex(self.values(np.array([float(t)]))[0])

    @property
    def is_real(self):
        return bool(np.all(self.coeffs.imag == 0.0))

    def real_part(self):
        return PiecewiseComplexFunction(self.breakpoints, self.coeffs.real.astype(complex))

    def imag_part(self):
        return PiecewiseComplexFunction(self.breakpoints, self.coeffs.imag.astype(complex))

    def scaled(self, factor):
        return PiecewiseComplexFunction(self.breakpoints, self.coeffs * factor)

    def to_json(self):
        return {
            "breakpoints": [float(b) for b in self.breakpoints],
            "pieces": [
                {"re": [float(c.real) for c in row], "im": [float(c.imag) for c in row]}
                for row in self.coeffs
            ],
        }

    @classmethod
    def from_json(cls, obj):
        pieces = []
        for p in obj["pieces"]:
            re = np.asarray(p["re"], dtype=float)
            im = np.asarray(p.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise ValueError("re/im coefficient lists must have equal length")
            pieces.append(re + 1j * im)
        return cls.from_pieces(obj["breakpoints"], pieces)


@dataclass(frozen=True)
class IntervalMask:
    """Finite union of disjoint closed subintervals of [0,1], sorted."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        prev = -np.inf
        for a, b in ivs:
            if not (0.0 <= a <= b <= 1.0):
                raise ValueError("mask intervals must lie inside [0,1]")
            if a < prev:
                raise ValueError("mask intervals must be sorted and disjoint")
            prev = b
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def full(cls):
        return cls(((0.0, 1.0),))

    @classmethod
    def complement_of_windows(cls, centers, half_width):
        """[0,1] minus the open windows (c - h, c + h); empty gaps dropped."""
        edges = [0.0]
        for c in sorted(centers):
            edges.extend([c - half_width, c + half_width])
        edges.append(1.0)
        ivs = []
        for a, b in zip(edges[::2], edges[1::2]):
            if b - a > 1e-15:
                ivs.append((max(a, 0.0), min(b, 1.0)))
        return cls(tuple(ivs))

    @property
    def measure(self):
        return sum(b - a for a, b in self.intervals)

    def endpoints(self):
        return [e for iv in self.intervals for e in iv]

    def contains(self, t):
        return any(a <= t <= b for a, b in self.intervals)

    def clipped(self, lo, hi):
        """Intersections of the mask with [lo, hi]."""
        out = []
        for a, b in self.intervals:
            a2, b2 = max(a, lo), min(b, hi)
            if b2 > a2:
                out.append((a2, b2))
        return out


def evaluate(f: PiecewiseComplexFunction, t: float) -> complex:
    """Point evaluation; right-continuous at breakpoints, domain [0,1]."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0,1]")
    return f(t)


def _antiderivative_coeffs(coeffs):
    degs = np.arange(1, coeffs.shape[-1] + 1, dtype=float)
    return coeffs / degs


def integrate(f: PiecewiseComplexFunction, a: float, b: float) -> complex:
    """Exact integral of f over [a, b] via per-piece antiderivatives."""
    if not (0.0 <= a <= b <= 1.0):
        raise ValueError("need 0 <= a <= b <= 1")
    anti = _antiderivative_coeffs(f.coeffs)
    bp = f.breakpoints
    total = 0.0 + 0.0j
    for i in range(len(bp) - 1):
        lo, hi = max(bp[i], a), min(bp[i + 1], b)
        if hi <= lo:
            continue
        c = anti[i]
        plo = plhi = 0.0 + 0.0j
        for d in range(c.size - 1, -1, -1):
            plo = plo * lo + c[d]
            plhi = plhi * hi + c[d]
        total += plhi * hi - plo * lo
    return complex(total)


def integrate_masked(f: PiecewiseComplexFunction, mask: IntervalMask) -> complex:
    return sum((integrate(f, a, b) for a, b in mask.intervals), 0.0 + 0.0j)


def integrate_against_phase(f, theta, mask, cfg: QuadratureConfig) -> complex:
    """Integral of f(t) e^{i theta(t)} over the mask by adaptive quadrature.

    Panels are seeded at the breakpoints of f, at the mask endpoints, and at
    the structural points of theta (jump centers and mollified-support
    edges), so each panel sees a smooth integrand.
    """
    splits = list(f.breakpoints) + list(theta.feature_points())
    total = 0.0 + 0.0j
    measure = max(mask.measure, 1e-300)
    for a, b in mask.intervals:
        seg_cfg = QuadratureConfig(
            abs_tol=cfg.abs_tol * max((b - a) / measure, 1e-3),
            max_subdivisions=cfg.max_subdivisions,
        )

        def integrand(t):
            return f.values(t) * np.exp(1j * theta.values(t))

        total += adaptive_integrate(integrand, a, b, seg_cfg, split_points=splits)
    return complex(total)


def _poly_product_integral(c1, c2, lo, hi):
    """Exact integral over [lo, hi] of p1(t) * conj(p2(t))."""
    prod = np.convolve(c1, np.conj(c2))
    anti = _antiderivative_coeffs(prod)
    plo = phi = 0.0 + 0.0j
    for d in range(anti.size - 1, -1, -1):
        plo = plo * lo + anti[d]
        phi = phi * hi + anti[d]
    return phi * hi - plo * lo


def inner_product(f, g, mask=None):
    """Exact L^2 inner product <f, g> = integral of f * conj(g), optionally masked."""
    if mask is None:
        mask = IntervalMask.full()
    edges = np.unique(np.concatenate([f.breakpoints, g.breakpoints]))
    total = 0.0 + 0.0j
    for a, b in mask.intervals:
        for lo, hi in zip(edges[:-1], edges[1:]):
            s, e = max(lo, a), min(hi, b)
            if e <= s:
                continue
            i = np.searchsorted(f.breakpoints, s, side="right") - 1
            j = np.searchsorted(g.breakpoints, s, side="right") - 1
            i = min(max(i, 0), f.coeffs.shape[0] - 1)
            j = min(max(j, 0), g.coeffs.shape[0] - 1)
            total += _poly_product_integral(f.coeffs[i], g.coeffs[j], s, e)
    return complex(total)


def independent_subset(fs, tol=1e-10, mask=None):
    """Indices of a maximal L^2-independent subfamily, kept in input order.

    Gram-Schmidt over the exact Gram matrix; a function joins the subset if
    its squared residual against the span so far exceeds `tol` times the
    largest Gram diagonal.  Annihilating the subset annihilates the span.
    """
    if not fs:
        raise ValueError("need at least one function")
    gram = np.array([[inner_product(fi, fj, mask) for fj in fs] for fi in fs])
    scale = float(np.max(gram.real.diagonal())) if len(fs) else 0.0
    if scale <= 0.0:
        return []
    thresh = tol * scale
    chosen = []
    basis = []  # coefficient rows over fs expressing the orthogonalized picks
    for i in range(len(fs)):
        coeff = np.zeros(len(fs), dtype=complex)
        coeff[i] = 1.0
        for b, bn2 in basis:
            alpha = (coeff @ gram @ np.conj(b)) / bn2
            coeff = coeff - alpha * b
        nrm2 = float((coeff @ gram @ np.conj(coeff)).real)
        if nrm2 > thresh:
            chosen.append(i)
            basis.append((coeff, nrm2))
    return chosen


def pack_real_pairs(fs):
    """Combine consecutive real functions into complex ones: (g, h) -> g + i h.

    An odd trailing function passes through; output length is ceil(n/2).
    """
    for f in fs:
        if not f.is_real:
            raise ValueError("pack_real_pairs needs real-valued inputs")
    out = []
    for k in range(0, len(fs) - 1, 2):
        g, h = fs[k], fs[k + 1]
        edges = np.unique(np.concatenate([g.breakpoints, h.breakpoints]))
        pieces = []
        for lo in edges[:-1]:
            i = min(np.searchsorted(g.breakpoints, lo, side="right") - 1, g.coeffs.shape[0] - 1)
            j = min(np.searchsorted(h.breakpoints, lo, side="right") - 1, h.coeffs.shape[0] - 1)
            width = max(g.coeffs.shape[1], h.coeffs.shape[1])
            row = np.zeros(width, dtype=complex)
            row[: g.coeffs.shape[1]] += g.coeffs[i].real
            row[: h.coeffs.shape[1]] += 1j * h.coeffs[j].real
            pieces.append(row)
        out.append(PiecewiseComplexFunction.from_pieces(edges, pieces))
    if len(fs) % 2:
        out.append(fs[-1])
    return out


def poly_compose_affine(coeffs, shift, scale):
    """Coefficients of p(shift + scale*s) as a polynomial in s (Horner form)."""
    c = np.asarray(coeffs, dtype=complex)
    out = np.array([c[-1]], dtype=complex)
    for d in range(c.size - 2, -1, -1):
        new = np.zeros(out.size + 1, dtype=complex)
        new[:-1] = shift * out
        new[1:] += scale * out
        new[0] += c[d]
        out = new
    return out
