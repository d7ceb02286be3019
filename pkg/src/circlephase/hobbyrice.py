"""Sign-function moment annihilation (the classical Hobby-Rice problem).

For m real integrable constraint functions there is a +/-1-valued function
with at most m sign changes whose moments against all constraints vanish.
The solver uses the sphere parameterization behind the Borsuk-Ulam proof:
a unit vector x in R^{m+1} induces interval lengths x_i^2 and interval signs
sign(x_i); the induced moment map F is odd and continuous, so it has a zero
on the sphere, found here by multistart damped Gauss-Newton with exact
residuals and Jacobians (everything is piecewise polynomial).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc

from .errors import SolverFailure
from .functions import IntervalMask, PiecewiseComplexFunction
from .phases import StepPhase, _emit_steps


@dataclass(frozen=True)
class SignPattern:
    """A +/-1-valued function: leading sign, alternating at each switch point."""

    switch_points: tuple
    leading_sign: int

    def __post_init__(self):
        pts = tuple(float(p) for p in self.switch_points)
        if any(not 0.0 < p < 1.0 for p in pts):
            raise ValueError("switch points must lie in (0,1)")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("switch points must be strictly increasing")
        if self.leading_sign not in (-1, 1):
            raise ValueError("leading sign must be +1 or -1")
        object.__setattr__(self, "switch_points", pts)

    def sign_at(self, t):
        k = np.searchsorted(np.asarray(self.switch_points), t, side="right")
        return self.leading_sign * (-1) ** int(k)

    def sign_left(self, t):
        k = np.searchsorted(np.asarray(self.switch_points), t, side="left")
        return self.leading_sign * (-1) ** int(k)


@dataclass(frozen=True)
class SphereCoordinates:
    """Unit vector in R^{m+1}; lengths are x_i^2, signs are sign(x_i) (0 -> +)."""

    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float, copy=True)
        nrm = float(np.linalg.norm(x))
        if not math.isfinite(nrm) or nrm == 0.0:
            raise ValueError("coordinates must be a nonzero finite vector")
        x /= nrm
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    def to_pattern(self) -> SignPattern:
        lengths = self.x * self.x
        signs = np.where(self.x < 0.0, -1, 1)
        switches = []
        cur = None
        pos = 0.0
        for ln, sg in zip(lengths, signs):
            if ln <= 0.0:
                continue
            if cur is None:
                cur = sg
                leading = sg
            elif sg != cur:
                if 0.0 < pos < 1.0:
                    switches.append(pos)
                cur = sg
            pos += ln
        if cur is None:
            leading = 1
        # collapse numerically coincident switches (they cancel pairwise)
        cleaned = []
        for p in switches:
            if cleaned and p == cleaned[-1]:
                cleaned.pop()
            else:
                cleaned.append(p)
        return SignPattern(tuple(cleaned), int(leading))


class _MaskedFamily:
    """Exact masked antiderivatives of a family of real piecewise polynomials."""

    def __init__(self, gs, mask: IntervalMask):
        edges = set()
        for g in gs:
            edges.update(float(b) for b in g.breakpoints)
        edges.update(mask.endpoints())
        edges.update((0.0, 1.0))
        self.edges = np.array(sorted(edges))
        self.n_funcs = len(gs)
        n_seg = self.edges.size - 1
        width = max(g.coeffs.shape[1] for g in gs)
        self.value_coeffs = np.zeros((n_seg, self.n_funcs, width))
        self.anti_coeffs = np.zeros((n_seg, self.n_funcs, width + 1))
        self.inside = np.zeros(n_seg, dtype=bool)
        for s in range(n_seg):
            lo = self.edges[s]
            self.inside[s] = any(a <= lo < b for a, b in mask.intervals)
            if not self.inside[s]:
                continue
            for k, g in enumerate(gs):
                i = min(np.searchsorted(g.breakpoints, lo, side="right") - 1, g.coeffs.shape[0] - 1)
                c = g.coeffs[i].real
                self.value_coeffs[s, k, : c.size] = c
                self.anti_coeffs[s, k, 1 : c.size + 1] = c / np.arange(1, c.size + 1)
        self.prefix = np.zeros((self.edges.size, self.n_funcs))
        for s in range(n_seg):
            lo, hi = self.edges[s], self.edges[s + 1]
            seg = self._anti(s, hi) - self._anti(s, lo) if self.inside[s] else 0.0
            self.prefix[s + 1] = self.prefix[s] + seg

    def _anti(self, seg, t):
        out = np.zeros(self.n_funcs)
        for d in range(self.anti_coeffs.shape[2] - 1, -1, -1):
            out = out * t + self.anti_coeffs[seg, :, d]
        return out

    def _value(self, seg, t):
        out = np.zeros(self.n_funcs)
        for d in range(self.value_coeffs.shape[2] - 1, -1, -1):
            out = out * t + self.value_coeffs[seg, :, d]
        return out

    def seg_index(self, t):
        return int(np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, self.edges.size - 2))

    def antiderivative(self, t):
        """Vector of integrals of g_k * I_mask over [0, t]."""
        t = float(np.clip(t, 0.0, 1.0))
        s = self.seg_index(t)
        base = self.prefix[s]
        if not self.inside[s]:
            return base.copy()
        return base + self._anti(s, t) - self._anti(s, self.edges[s])

    def masked_value(self, t):
        """Vector of g_k(t) * I_mask(t)."""
        t = float(np.clip(t, 0.0, 1.0))
        s = self.seg_index(t)
        if not self.inside[s]:
            return np.zeros(self.n_funcs)
        return self._value(s, t)

    @property
    def scale(self):
        return max(1.0, float(np.max(np.abs(self.prefix))))


def moment_residual(gs, pattern: SignPattern, mask: IntervalMask | None = None):
    """Exact moments of g_k * I_mask against the sign function of `pattern`."""
    if mask is None:
        mask = IntervalMask.full()
    fam = _MaskedFamily(gs, mask)
    edges = [0.0, *pattern.switch_points, 1.0]
    out = np.zeros(fam.n_funcs)
    sign = pattern.leading_sign
    for a, b in zip(edges[:-1], edges[1:]):
        out += sign * (fam.antiderivative(b) - fam.antiderivative(a))
        sign = -sign
    return out


def _moment_map(fam: _MaskedFamily, x):
    sigma = np.where(x < 0.0, -1.0, 1.0)
    s = np.minimum(np.cumsum(x * x), 1.0)
    prev = np.zeros(fam.n_funcs)
    total = np.zeros(fam.n_funcs)
    gvals = np.zeros((x.size, fam.n_funcs))
    for i in range(x.size):
        cur = fam.antiderivative(s[i])
        total += sigma[i] * (cur - prev)
        gvals[i] = fam.masked_value(s[i])
        prev = cur
    return total, sigma, gvals


def _jacobian(fam: _MaskedFamily, x, sigma, gvals):
    # dF_k/dx_l = 2 x_l * sum_{i >= l} (sigma_i - sigma_{i+1}) g_k(s_i), with
    # sigma_{m+2} := 0 so the last partition point contributes sigma_last*g(1).
    m1 = x.size
    diff = np.empty((m1, fam.n_funcs))
    for i in range(m1):
        nxt = sigma[i + 1] if i + 1 < m1 else 0.0
        diff[i] = (sigma[i] - nxt) * gvals[i]
    # suffix sums over i
    suffix = np.cumsum(diff[::-1], axis=0)[::-1]
    return (2.0 * x)[None, :] * suffix.T  # (n_funcs, m+1)


def _sobol_sphere(n_points, dim, seed):
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    u = sampler.random(n_points)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    nrm = np.linalg.norm(g, axis=1, keepdims=True)
    nrm[nrm == 0.0] = 1.0
    return g / nrm


def _max_workers():
    raw = os.environ.get("ANNIHILATOR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def solve_hobby_rice(gs, mask: IntervalMask | None = None, tol: float = 1e-10,
                     seeds: int = 64, seed: int = 0, max_iter: int = 200) -> SignPattern:
    """Find a sign pattern with at most len(gs) switches annihilating all gs.

    Multistart damped Gauss-Newton over the unit sphere; steps are solved in
    the tangent space and renormalized.  The winning start is chosen by
    lowest residual, then lexicographically smallest switch vector, then
    positive leading sign, independent of evaluation order.
    """
    if not gs:
        raise ValueError("need at least one constraint function")
    if mask is None:
        mask = IntervalMask.full()
    fam = _MaskedFamily(gs, mask)
    m = len(gs)
    stop_tol = max(1e-15 * fam.scale, 1e-16)

    starts = _sobol_sphere(seeds, m + 1, seed)

    def run_one(x0):
        x = x0.copy()
        fx, sigma, gvals = _moment_map(fam, x)
        cost = float(fx @ fx)
        for _ in range(max_iter):
            if float(np.max(np.abs(fx))) <= stop_tol:
                break
            J = _jacobian(fam, x, sigma, gvals)
            Jt = J - np.outer(J @ x, x)
            step, *_ = np.linalg.lstsq(Jt, -fx, rcond=None)
            step -= (step @ x) * x
            lam, moved = 1.0, False
            for _ in range(40):
                xn = x + lam * step
                nrm = np.linalg.norm(xn)
                if nrm > 0:
                    xn /= nrm
                    fn_, sg_, gv_ = _moment_map(fam, xn)
                    cn = float(fn_ @ fn_)
                    if cn < cost:
                        x, fx, sigma, gvals, cost = xn, fn_, sg_, gv_, cn
                        moved = True
                        break
                lam *= 0.5
            if not moved:
                break
        return x, float(np.max(np.abs(fx)))

    workers = _max_workers()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, starts))
    else:
        results = [run_one(x0) for x0 in starts]

    candidates = []
    for x, res in results:
        pattern = SphereCoordinates(x).to_pattern()
        # recheck on the canonical pattern: merging is a null-set change
        resid = float(np.max(np.abs(moment_residual(gs, pattern, mask))))
        candidates.append((resid, pattern.switch_points, -pattern.leading_sign, pattern))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    best_res, _, _, best = candidates[0]
    if best_res > tol:
        raise SolverFailure(
            f"no start reached residual {tol} (best {best_res:.3e}); "
            "a zero exists, increase seeds or iterations",
            best=best,
            best_residual=best_res,
        )
    return best


def select_phi_sharp(pattern: SignPattern, boundary) -> StepPhase:
    """Turn a sign pattern into a {0, pi} phase, flipped to be nonzero at few
    mask-boundary points.

    `boundary` holds the sorted 2n window-edge points; even positions are
    left window edges (mask lies below, judged by the left limit), odd are
    right edges (mask above, judged by the value).  The orientation with pi
    at no more than n of these points is kept; on a tie, the one vanishing
    at t = 0 wins.
    """
    boundary = [float(b) for b in boundary]
    if sorted(boundary) != boundary:
        raise ValueError("boundary points must be sorted")
    n2 = len(boundary)
    minus_count = 0
    for idx, b in enumerate(boundary):
        side = pattern.sign_left(b) if idx % 2 == 0 else pattern.sign_at(b)
        if side == -1:
            minus_count += 1
    # phi# = pi where the sign equals `pi_sign`
    if 2 * minus_count > n2:
        pi_sign = +1
    elif 2 * minus_count < n2:
        pi_sign = -1
    else:
        pi_sign = -1 if pattern.leading_sign == 1 else +1
    base = math.pi if pattern.leading_sign == pi_sign else 0.0
    points = []
    val = base
    for p in pattern.switch_points:
        new = math.pi - val
        points.append((p, new - val))
        val = new
    locs, sizes = _emit_steps(points)
    return StepPhase(locs, sizes, base_value=base, domain=(0.0, 1.0))


def count_masked_discontinuities(phi: StepPhase, mask: IntervalMask) -> int:
    """Discontinuities of phi * indicator(mask) interior to (0,1):
    jumps of phi inside mask intervals plus mask endpoints where the
    mask-side limit of phi is nonzero."""
    points = set()
    for loc, size in zip(phi.jump_locations, phi.jump_sizes):
        if size != 0.0 and any(a < loc < b for a, b in mask.intervals):
            points.add(float(loc))
    for a, b in mask.intervals:
        if 0.0 < a < 1.0 and phi.value(a) != 0.0:
            points.add(float(a))
        if 0.0 < b < 1.0 and phi.value_left(b) != 0.0:
            points.add(float(b))
    return len(points)
