"""Step phases and their mollifications.

A step phase is a finite staircase; mollifying it against the bump turns
each jump J at location a into a smooth term J*Psi((t-a)/h), so a smooth
phase is stored as a list of (center, width, jump) terms plus a base value.
That closed form makes evaluation, differentiation, and the convolution
identity exact, with cost linear in the number of jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .mollifier import Mollifier, get_mollifier
from .quadrature import QuadratureConfig, adaptive_integrate

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StepPhase:
    """Right-continuous staircase: base_value plus jumps at sorted locations."""

    jump_locations: np.ndarray
    jump_sizes: np.ndarray
    base_value: float = 0.0
    domain: tuple = (-1.0, 1.0)

    def __post_init__(self):
        locs = np.array(self.jump_locations, dtype=float, copy=True)
        sizes = np.array(self.jump_sizes, dtype=float, copy=True)
        if locs.shape != sizes.shape:
            raise ValueError("jump locations and sizes must align")
        if np.any(np.diff(locs) <= 0):
            raise ValueError("jump locations must be strictly increasing")
        lo, hi = self.domain
        if locs.size and (locs[0] < lo or locs[-1] > hi):
            raise ValueError("jumps must lie inside the domain")
        locs.flags.writeable = False
        sizes.flags.writeable = False
        object.__setattr__(self, "jump_locations", locs)
        object.__setattr__(self, "jump_sizes", sizes)
        object.__setattr__(self, "domain", (float(lo), float(hi)))

    def value(self, t):
        """base + sum of jumps at locations <= t (right-continuous)."""
        k = np.searchsorted(self.jump_locations, t, side="right")
        return self.base_value + float(np.sum(self.jump_sizes[:k]))

    def value_left(self, t):
        k = np.searchsorted(self.jump_locations, t, side="left")
        return self.base_value + float(np.sum(self.jump_sizes[:k]))

    @property
    def total_rise(self):
        return self.base_value + float(np.sum(self.jump_sizes))


def _emit_steps(points):
    """Collapse (location, value-after) walk data into merged jump arrays."""
    locs, sizes = [], []
    for loc, size in points:
        if size == 0.0:
            continue
        if locs and loc == locs[-1]:
            sizes[-1] += size
            if sizes[-1] == 0.0:
                locs.pop()
                sizes.pop()
        else:
            locs.append(loc)
            sizes.append(size)
    return np.asarray(locs), np.asarray(sizes)


def build_step_phase(z: complex) -> StepPhase:
    """Staircase on [-1,1] with values 0, pi/2, pi, 3pi/2 on intervals of
    lengths (1+u)/2, (1+v)/2, (1-u)/2, (1-v)/2 for z = u+iv; zero-length
    intervals are dropped.  By construction its unit-circle average is z."""
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise ValueError(f"|z|={abs(z)} exceeds 1")
    u, v = z.real, z.imag
    lengths = [(1 + u) / 2, (1 + v) / 2, (1 - u) / 2, (1 - v) / 2]
    values = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
    points = []
    pos = -1.0
    cur = 0.0
    for val, ln in zip(values, lengths):
        if ln <= 0.0:
            continue
        if val != cur:
            points.append((pos, val - cur))
            cur = val
        pos += ln
    locs, sizes = _emit_steps(points)
    return StepPhase(locs, sizes, base_value=0.0, domain=(-1.0, 1.0))


def step_integral_exp(s: StepPhase) -> complex:
    """Exact integral of e^{i s(t)} over the domain: sum of length * e^{i value}."""
    lo, hi = s.domain
    edges = np.concatenate([[lo], s.jump_locations, [hi]])
    vals = s.base_value + np.concatenate([[0.0], np.cumsum(s.jump_sizes)])
    total = 0.0 + 0.0j
    for k in range(edges.size - 1):
        total += (edges[k + 1] - edges[k]) * np.exp(1j * vals[k])
    return complex(total)


def clamp_step(s: StepPhase, h: float) -> StepPhase:
    """Zero the staircase outside (h-1, 1-h) and pin it to 2*pi from 1-h on.

    The left truncation point carries the (right-continuous) value of s
    there, so the result climbs 0 -> 2*pi across [h-1, 1-h].
    """
    if not 0.0 < h < 1.0:
        raise ValueError("need 0 < h < 1")
    a, b = h - 1.0, 1.0 - h
    points = []
    v_at_a = s.value(a)
    if v_at_a != 0.0:
        points.append((a, v_at_a))
    for loc, size in zip(s.jump_locations, s.jump_sizes):
        if a < loc < b:
            points.append((loc, size))
    points.append((b, TWO_PI - s.value_left(b)))
    locs, sizes = _emit_steps(points)
    return StepPhase(locs, sizes, base_value=0.0, domain=s.domain)


@dataclass(frozen=True)
class SmoothPhase:
    """Finite sum of mollified jumps plus optional 2*pi-type step offsets.

    value(t) = base_value + sum_k jumps[k] * Psi((t - centers[k]) / widths[k])
             + sum of offset amounts at locations <= t.
    Offsets make the phase discontinuous and are not produced by this
    package's constructions; they exist for callers that assemble phases
    from pre-offset segments.
    """

    centers: np.ndarray
    widths: np.ndarray
    jumps: np.ndarray
    base_value: float = 0.0
    domain: tuple = (0.0, 1.0)
    offsets: tuple = ()
    mollifier: Mollifier = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.centers, dtype=float, copy=True))
        w = np.atleast_1d(np.array(self.widths, dtype=float, copy=True))
        j = np.atleast_1d(np.array(self.jumps, dtype=float, copy=True))
        if not (c.shape == w.shape == j.shape):
            raise ValueError("term arrays must align")
        if np.any(w <= 0):
            raise ValueError("term widths must be positive")
        for arr in (c, w, j):
            arr.flags.writeable = False
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "jumps", j)
        object.__setattr__(self, "offsets", tuple((float(a), float(b)) for a, b in self.offsets))
        if self.mollifier is None:
            object.__setattr__(self, "mollifier", get_mollifier())

    @classmethod
    def constant(cls, value, domain=(0.0, 1.0)):
        return cls(np.empty(0), np.empty(0), np.empty(0), base_value=float(value), domain=domain)

    @property
    def n_terms(self):
        return self.centers.size

    def values(self, t):
        m = self.mollifier
        out = _backend.phase_eval(
            self.centers, self.widths, self.jumps, self.base_value, t, m.cdf_table, m.c
        )
        for loc, amount in self.offsets:
            out = out + amount * (np.asarray(t, dtype=float) >= loc)
        return out

    def derivative_values(self, t):
        m = self.mollifier
        return _backend.phase_deriv(self.centers, self.widths, self.jumps, t, m.cdf_table, m.c)

    def __call__(self, t):
        return float(self.values(np.array([float(t)]))[0])

    def derivative(self, t):
        return float(self.derivative_values(np.array([float(t)]))[0])

    def feature_points(self):
        """Structural points for quadrature panel seeding."""
        pts = []
        for c, w in zip(self.centers, self.widths):
            pts.extend((c - w, c, c + w))
        pts.extend(loc for loc, _ in self.offsets)
        return pts

    def term_sum_between(self, lo, hi):
        """Increase of the mollified-term part (offsets excluded) from lo to hi."""
        m = self.mollifier
        lo_vals = _backend.bump_cdf((lo - self.centers) / self.widths, m.cdf_table, m.c)
        hi_vals = _backend.bump_cdf((hi - self.centers) / self.widths, m.cdf_table, m.c)
        return float(np.sum(self.jumps * (hi_vals - lo_vals)))

    def rescaled(self, shift, scale, domain=None):
        """The phase t -> self((t - shift)/scale) for scale > 0."""
        if scale <= 0:
            raise ValueError("scale must be positive")
        lo, hi = self.domain
        new_domain = domain if domain is not None else (shift + scale * lo, shift + scale * hi)
        return replace(
            self,
            centers=shift + scale * self.centers,
            widths=scale * self.widths,
            jumps=self.jumps.copy(),
            domain=new_domain,
            offsets=tuple((shift + scale * a, b) for a, b in self.offsets),
        )

    def shifted(self, amount):
        return replace(self, base_value=self.base_value + float(amount))


def mollify(s: StepPhase, h: float, m: Mollifier | None = None) -> SmoothPhase:
    """Convolve a staircase with the width-h bump, in closed form.

    Uses (I_[a,inf) * psi_h)(t) = Psi((t-a)/h) termwise, so the result is
    exact and evaluable in O(#jumps).
    """
    if not h > 0:
        raise ValueError("mollification width must be positive")
    if m is None:
        m = get_mollifier()
    n = s.jump_locations.size
    return SmoothPhase(
        centers=s.jump_locations.copy(),
        widths=np.full(n, float(h)),
        jumps=s.jump_sizes.copy(),
        base_value=s.base_value,
        domain=s.domain,
        mollifier=m,
    )


def window_phase(z: complex, h: float, m: Mollifier | None = None) -> SmoothPhase:
    """The smooth window phase on [-1,1]: staircase for z, clamped at margin h,
    mollified at width h.  Runs from exactly 0 at -1 to exactly 2*pi at +1,
    flat to all orders at both ends."""
    return mollify(clamp_step(build_step_phase(z), h), h, m)


def mask_step_phase(phi: StepPhase, mask) -> StepPhase:
    """The product phi * indicator(mask) as a staircase on [0,1].

    Mask intervals act as [a, b) half-open, matching the global
    right-continuity convention; the difference from closed intervals is a
    null set and invisible to mollification.
    """
    events = set(float(x) for x in phi.jump_locations)
    for a, b in mask.intervals:
        events.add(a)
        events.add(b)
    points = []
    prev = 0.0
    for p in sorted(events):
        inside = any(a <= p < b for a, b in mask.intervals)
        val = phi.value(p) if inside else 0.0
        if val != prev:
            points.append((p, val - prev))
            prev = val
    locs, sizes = _emit_steps(points)
    return StepPhase(locs, sizes, base_value=0.0, domain=(0.0, 1.0))


def phase_total_variation(theta: SmoothPhase, a: float, b: float, cfg: QuadratureConfig) -> float:
    """Integral of |theta'| over [a, b].

    Between term-support edges the sign of theta' is constant whenever all
    terms active there share a jump sign, and the contribution is the exact
    net increase; only mixed-sign stretches fall back to quadrature.  Step
    offsets inside (a, b) add their absolute sizes.
    """
    if b < a:
        raise ValueError("bounds out of order")
    total = sum(abs(amount) for loc, amount in theta.offsets if a < loc < b)
    if theta.n_terms == 0 or b == a:
        return float(total)
    edges = [a, b]
    for c, w in zip(theta.centers, theta.widths):
        for p in (c - w, c + w):
            if a < p < b:
                edges.append(float(p))
    edges = np.unique(np.asarray(edges))
    for lo, hi in zip(edges[:-1], edges[1:]):
        active = (theta.centers - theta.widths < hi) & (theta.centers + theta.widths > lo)
        if not np.any(active):
            continue
        signs = np.sign(theta.jumps[active])
        if np.all(signs >= 0) or np.all(signs <= 0):
            total += abs(theta.term_sum_between(lo, hi))
        else:
            centers = theta.centers[active]

            def integrand(t):
                return np.abs(theta.derivative_values(t))

            total += adaptive_integrate(integrand, lo, hi, cfg, split_points=centers)
    return float(total)
