"""The annihilator pipeline.

Given n complex piecewise polynomials, build a smooth phase theta with
integral f_k e^{i theta} = 0 for all k:

  1. pick interpolation nodes t_1 < ... < t_n with invertible sample
     matrix M = [f_k(t_j)] (greedy pivoted elimination),
  2. certify a window half-width delta so that the window-moment map stays
     within margin 1/2 of the linear map M on the unit polydisk,
  3. annihilate the functions on the complement of the windows with a
     mollified two-level sign phase phi whose residual vector r is small
     enough, via a sign-pattern solve plus a smoothing-width bisection,
  4. assemble theta*_z from phi and one z-controlled window phase per node,
  5. damped fixed-point iteration (with a least-squares fallback) drives
     the full residual map T(z) = delta*Q(delta; z) + r to zero; a solution
     exists because z |-> z - M^{-1} T(z)/delta maps the polydisk to itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc

from . import _backend
from .errors import (CertificationError, ConsistencyError, ConstructionError,
                     NearDependenceError, SolverFailure)
from .functions import (IntervalMask, independent_subset, integrate_against_phase,
                        pack_real_pairs, poly_compose_affine)
from .hobbyrice import SignPattern, select_phi_sharp, solve_hobby_rice
from .mollifier import get_mollifier
from .phases import SmoothPhase, StepPhase, build_step_phase, clamp_step, mask_step_phase, mollify, window_phase
from .quadrature import QuadratureConfig

# uniform bound on |integral e^{i theta_{h,z}} - z| from the approximate-identity
# estimate: three mollified jumps plus the clamp regions cost at most 2*pi*(6+4)*h
WINDOW_RATE = 20.0 * math.pi


@dataclass(frozen=True)
class NodeSelection:
    """Interpolation nodes with the sample matrix and its inverse."""

    nodes: np.ndarray
    matrix: np.ndarray
    matrix_inverse: np.ndarray = field(repr=False)
    d: float = 0.0
    condition_estimate: float = 0.0

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float, copy=True)
        if np.any(np.diff(nodes) <= 0) or nodes[0] <= 0.0 or nodes[-1] >= 1.0:
            raise ValueError("nodes must be strictly increasing inside (0,1)")
        matrix = np.array(self.matrix, dtype=complex, copy=True)
        inv = np.array(self.matrix_inverse, dtype=complex, copy=True)
        for name, arr in (("nodes", nodes), ("matrix", matrix), ("matrix_inverse", inv)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self):
        return self.nodes.size


@dataclass(frozen=True)
class DeltaCertificate:
    """A window half-width with certified per-node deviation margins."""

    delta: float
    per_node_margins: tuple
    z_grid_resolution: int
    margin_threshold: float = 0.4

    def __post_init__(self):
        if not (0.0 < self.margin_threshold < 0.5):
            raise ValueError("margin threshold must be below 1/2")
        if sum(self.per_node_margins) > self.margin_threshold:
            raise ValueError("margins do not certify the threshold")


@dataclass(frozen=True)
class PhiConstruction:
    """Masked smooth phase phi, its smoothing width, and residual vector."""

    eta: float
    phi: SmoothPhase
    r: np.ndarray
    phi_sharp: StepPhase

    def __post_init__(self):
        r = np.asarray(self.r, dtype=complex)
        r.flags.writeable = False
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class PipelineState:
    """Everything fixed before the fixed-point solve."""

    functions: tuple
    nodes: NodeSelection
    certificate: DeltaCertificate
    phi: PhiConstruction

    @property
    def delta(self):
        return self.certificate.delta


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    damping: float = 0.5
    max_iterations: int = 300
    seed: int = 0
    hr_seeds: int = 64
    hr_tol: float = 1e-10
    margin_threshold: float = 0.4
    grid_resolution: int = 17
    grid_resolution_max: int = 129
    grid_work_budget: int = 400_000_000
    pivot_tol: float = 1e-10
    no_pack: bool = False
    check_decomposition: bool = True
    candidate_grid: tuple | None = None
    quadrature: QuadratureConfig = QuadratureConfig()


@dataclass(frozen=True)
class AnnihilatorResult:
    z0: np.ndarray
    theta: SmoothPhase
    residuals: np.ndarray
    input_residuals: np.ndarray
    norm_report: object
    state: PipelineState
    kept_indices: tuple
    packed: bool
    iterations: int
    consistency_max: float

    @property
    def certificate(self):
        return self.state.certificate

    @property
    def phi_construction(self):
        return self.state.phi


def default_candidate_grid(fs, points_per_piece=16):
    """Interior sample points inside every piece of the merged breakpoints."""
    edges = np.unique(np.concatenate([f.breakpoints for f in fs]))
    pts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        for i in range(1, points_per_piece + 1):
            pts.append(lo + (hi - lo) * i / (points_per_piece + 1))
    return tuple(sorted(pts))


def select_nodes(fs, candidate_grid) -> NodeSelection:
    """Greedy pivoted node placement.

    Nodes are added one at a time; the next node maximizes the absolute
    residual of f_k after eliminating against the rows already placed, which
    keeps the sample matrix invertible (its determinant is the product of
    the pivots).  Ties go to the smallest candidate.
    """
    n = len(fs)
    grid = [float(t) for t in sorted(candidate_grid)]
    breakpoints = set()
    for f in fs:
        breakpoints.update(float(b) for b in f.breakpoints)
    grid = [t for t in grid if 0.0 < t < 1.0 and t not in breakpoints]
    if not grid:
        raise NearDependenceError("candidate grid is empty after removing breakpoints")
    tgrid = np.asarray(grid)
    samples = np.array([f.values(tgrid) for f in fs])  # (n, n_grid)
    scale = float(np.max(np.abs(samples))) if samples.size else 0.0
    pivot_floor = 1e-10 * max(scale, 1e-300)

    chosen = []
    for k in range(n):
        if k == 0:
            resid = samples[0]
        else:
            idx = [grid.index(t) for t in chosen]
            mprime = samples[:k][:, idx]  # rows f_1..f_k at chosen nodes
            rhs = samples[k][idx]
            beta = np.linalg.solve(mprime.T, rhs)
            resid = samples[k] - beta @ samples[:k]
        resid = resid.copy()
        for t in chosen:
            resid[grid.index(t)] = 0.0
        best = int(np.argmax(np.abs(resid)))
        if abs(resid[best]) <= pivot_floor:
            raise NearDependenceError(
                f"no pivot above {pivot_floor:.3e} for function index {k}; "
                "functions are nearly dependent on this grid"
            )
        chosen.append(grid[best])

    nodes = np.sort(np.asarray(chosen))
    matrix = np.array([[f(t) for t in nodes] for f in fs])
    inv = np.linalg.inv(matrix)
    gaps = np.diff(np.concatenate([[0.0], nodes, [1.0]]))
    return NodeSelection(
        nodes=nodes,
        matrix=matrix,
        matrix_inverse=inv,
        d=float(gaps.min() / 2.0),
        condition_estimate=float(np.linalg.cond(matrix)),
    )


def window_moment(f, t_j, h, z, cfg: QuadratureConfig) -> complex:
    """integral over [-1,1] of f(t_j + h s) e^{i theta_{h,z}(s)} ds.

    Computed in the t variable as (1/h) * integral of f e^{i theta} over the
    window, with the window phase mapped by the affine substitution.
    """
    if h <= 0:
        raise ValueError("window half-width must be positive")
    if t_j - h < 0.0 or t_j + h > 1.0:
        raise ValueError("window exceeds [0,1]")
    if abs(z) > 1.0 + 1e-12:
        raise ValueError("|z| must be at most 1")
    theta = window_phase(z, h).rescaled(shift=t_j, scale=h)
    mask = IntervalMask(((t_j - h, t_j + h),))
    seg_cfg = QuadratureConfig(abs_tol=cfg.abs_tol * h, max_subdivisions=cfg.max_subdivisions)
    return integrate_against_phase(f, theta, mask, seg_cfg) / h


def compute_Q(fs, nodes: NodeSelection, h, zs, cfg: QuadratureConfig):
    """The window-moment map; at h = 0 exactly the matrix product M z."""
    zs = np.asarray(zs, dtype=complex)
    if h == 0.0:
        return nodes.matrix @ zs
    if not 0.0 < h <= nodes.d:
        raise ValueError("need 0 < h <= d")
    out = np.zeros(len(fs), dtype=complex)
    for j, tj in enumerate(nodes.nodes):
        for k, f in enumerate(fs):
            out[k] += window_moment(f, tj, h, zs[j], cfg)
    return out


def _window_pieces(f, t_j, h):
    """Pieces of s -> f(t_j + h s) on [-1, 1] as (lo, hi, coeffs)."""
    cuts = [-1.0]
    for b in f.breakpoints:
        s = (float(b) - t_j) / h
        if -1.0 < s < 1.0:
            cuts.append(s)
    cuts.append(1.0)
    cuts = sorted(set(cuts))
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        tm = t_j + h * 0.5 * (lo + hi)
        i = min(np.searchsorted(f.breakpoints, tm, side="right") - 1, f.coeffs.shape[0] - 1)
        out.append((lo, hi, poly_compose_affine(f.coeffs[i], t_j, h)))
    return out


def _poly_moment(coeffs, lo, hi):
    """Exact integral over [lo, hi] of the polynomial with given coefficients."""
    anti = np.concatenate([[0.0], coeffs / np.arange(1, coeffs.size + 1)])
    plo = phi_ = 0.0 + 0.0j
    for d in range(anti.size - 1, -1, -1):
        plo = plo * lo + anti[d]
        phi_ = phi_ * hi + anti[d]
    return phi_ - plo


def window_osc_bound(f, t_j, h):
    """Sound bound on the window oscillation integral of |f(t_j + h s) - f(t_j)|.

    Cauchy-Schwarz against the exact squared-deviation integral over [-1,1].
    """
    f0 = f(t_j)
    total = 0.0
    for lo, hi, coeffs in _window_pieces(f, t_j, h):
        dev = coeffs.copy()
        dev[0] -= f0
        sq = np.convolve(dev, np.conj(dev)).real
        total += float(_poly_moment(sq.astype(complex), lo, hi).real)
    return math.sqrt(2.0 * max(total, 0.0))


def window_sup_bound(f, t_j, h):
    """Coefficient bound on max |f| over the window [t_j - h, t_j + h]."""
    best = 0.0
    for lo, hi, coeffs in _window_pieces(f, t_j, h):
        umax = max(abs(lo), abs(hi))
        best = max(best, float(np.sum(np.abs(coeffs) * umax ** np.arange(coeffs.size))))
    return best


def _clamped_jump_data(z, h):
    step = clamp_step(build_step_phase(z), h)
    return step.jump_locations, step.jump_sizes


def _disk_grid(resolution):
    radii = np.linspace(0.0, 1.0, resolution)
    angles = 2.0 * math.pi * np.arange(resolution) / resolution
    pts = [0.0 + 0.0j]
    for r in radii[1:]:
        pts.extend(r * np.exp(1j * angles))
    eps = math.hypot(0.5 / (resolution - 1), math.pi / resolution)
    return np.asarray(pts, dtype=complex), eps


def _window_quad_nodes(delta):
    """Shared composite Gauss-Legendre mesh over [-1,1] at panel width ~delta."""
    from scipy.special import roots_legendre

    x15, w15 = roots_legendre(15)
    n_panels = int(math.ceil(2.0 / delta)) + 1
    edges = np.linspace(-1.0, 1.0, n_panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mid = 0.5 * (edges[:-1] + edges[1:])
    s_nodes = (mid[:, None] + half * x15[None, :]).ravel()
    s_weights = np.tile(w15 * half, n_panels)
    return s_nodes, s_weights


def _grid_margin(fs, nodes, j, delta, resolution, options):
    """Disk-grid bound on the node-j deviation, or None when too expensive.

    max over sampled w of ||M^{-1}(w M e_j - q_j(w))||_inf plus a Lipschitz
    safety term covering the gaps between samples (the window moments are
    Lipschitz in w with constant sup|f| * pi/sqrt(2) by the L^1 modulus of
    the clamped staircases under Young's inequality).
    """
    n_panels = int(math.ceil(2.0 / delta)) + 1
    work = 15 * n_panels * resolution * resolution
    if work > options.grid_work_budget:
        return None
    s_nodes, s_weights = _window_quad_nodes(delta)

    tj = nodes.nodes[j]
    fvals = np.array([f.values(tj + delta * s_nodes) for f in fs])
    wgrid, eps = _disk_grid(resolution)

    max_jumps = 5
    locs = np.zeros((wgrid.size, max_jumps))
    sizes = np.zeros((wgrid.size, max_jumps))
    counts = np.zeros(wgrid.size, dtype=np.int64)
    for i, w in enumerate(wgrid):
        jl, js = _clamped_jump_data(w, delta)
        counts[i] = jl.size
        locs[i, : jl.size] = jl
        sizes[i, : jl.size] = js

    m = get_mollifier()
    q = _backend.window_grid_moments(locs, sizes, counts, delta, fvals, s_nodes, s_weights, m.cdf_table, m.c)
    col = nodes.matrix[:, j]
    dev = wgrid[:, None] * col[None, :] - q  # (n_w, n)
    comp = nodes.matrix_inverse @ dev.T
    grid_max = float(np.max(np.abs(comp)))

    abs_inv = np.abs(nodes.matrix_inverse)
    sup = np.array([window_sup_bound(f, tj, delta) for f in fs])
    lam = 1.0 + (math.pi / math.sqrt(2.0)) * float(np.max(abs_inv @ sup))
    return grid_max + eps * lam + 1e-6


def find_delta(fs, nodes: NodeSelection, cfg: QuadratureConfig,
               options: SolverOptions | None = None) -> DeltaCertificate:
    """Certify a window half-width.

    Halve delta from d until the per-node deviation margins sum below the
    threshold.  The deviation of node j is bounded two ways and the smaller
    bound is kept: an analytic bound (window oscillation of f plus the
    uniform 20*pi*delta window-moment rate) and a disk-grid evaluation with
    a Lipschitz safety term, escalating the grid resolution while the safety
    term dominates.
    """
    if options is None:
        options = SolverOptions()
    abs_inv = np.abs(nodes.matrix_inverse)
    f_at_nodes = np.abs(np.array([[f(tj) for tj in nodes.nodes] for f in fs]))
    resolutions = [options.grid_resolution]
    while resolutions[-1] < options.grid_resolution_max:
        resolutions.append(2 * resolutions[-1] - 1)
    delta = nodes.d
    floor = 1e-9 * nodes.d
    while delta >= floor:
        margins = []
        for j in range(nodes.n):
            osc = np.array([window_osc_bound(f, nodes.nodes[j], delta) for f in fs])
            vec = osc + WINDOW_RATE * delta * f_at_nodes[:, j]
            margins.append(float(np.max(abs_inv @ vec)))
        used_resolution = 0
        for resolution in resolutions:
            if sum(margins) <= options.margin_threshold:
                break
            refined = []
            for j in range(nodes.n):
                g = _grid_margin(fs, nodes, j, delta, resolution, options)
                refined.append(margins[j] if g is None else min(margins[j], g))
            if refined != margins:
                used_resolution = resolution
            margins = refined
        if sum(margins) <= options.margin_threshold:
            return DeltaCertificate(
                delta=float(delta),
                per_node_margins=tuple(margins),
                z_grid_resolution=used_resolution,
                margin_threshold=options.margin_threshold,
            )
        delta /= 2.0
    raise CertificationError(
        f"no window half-width certified above {floor:.3e}; "
        "margins never fit the threshold"
    )


def build_phi(fs, nodes: NodeSelection, delta: float, cfg: QuadratureConfig,
              options: SolverOptions | None = None) -> PhiConstruction:
    """Construct the masked smooth phase phi and its residual vector.

    The sign-pattern solve runs on an independent subfamily of the masked
    real and imaginary parts (at most 2n constraints, hence at most 2n sign
    changes).  The smoothing width eta is halved from delta/2 until the
    mapped residual fits in the half-polydisk and no sign change sits inside
    a boundary collar (which keeps the discontinuity count at 3n).
    """
    if options is None:
        options = SolverOptions()
    mask = IntervalMask.complement_of_windows(nodes.nodes, delta)
    parts = []
    for f in fs:
        parts.extend((f.real_part(), f.imag_part()))
    keep = independent_subset(parts, tol=1e-12, mask=mask)
    constraints = [parts[i] for i in keep]
    if constraints:
        pattern = solve_hobby_rice(
            constraints, mask, tol=options.hr_tol, seeds=options.hr_seeds, seed=options.seed
        )
    else:
        pattern = SignPattern((), 1)
    boundary = sorted(
        [tj - delta for tj in nodes.nodes] + [tj + delta for tj in nodes.nodes]
    )
    phi_sharp = select_phi_sharp(pattern, boundary)

    eta = delta / 2.0
    floor = 1e-9 * delta
    inv = nodes.matrix_inverse
    while eta >= floor:
        collar_clear = all(
            not (b - eta < s < b or b < s < b + eta)
            for s in phi_sharp.jump_locations
            for b in boundary
        )
        if collar_clear:
            masked = mask_step_phase(phi_sharp, IntervalMask.complement_of_windows(nodes.nodes, delta + eta))
            phi = mollify(masked, eta)
            r = np.array([integrate_against_phase(f, phi, mask, cfg) for f in fs])
            if float(np.max(np.abs(inv @ r))) <= delta / 2.0:
                return PhiConstruction(eta=float(eta), phi=phi, r=r, phi_sharp=phi_sharp)
        eta /= 2.0
    raise ConstructionError(
        f"smoothing width underflowed below {floor:.3e} before the residual "
        "fit in the half-polydisk"
    )


def assemble_theta_star(zs, phi: SmoothPhase, nodes: NodeSelection, delta: float) -> SmoothPhase:
    """Glue phi and the window phases into one smooth phase on [0,1].

    Each window phase climbs exactly 0 -> 2*pi across its window, so the
    2*pi*(j-1) offsets of the piecewise definition are realized by the
    accumulated earlier windows and the result is a plain sum of mollified
    jumps: continuous, smooth, and exactly evaluable.
    """
    zs = np.asarray(zs, dtype=complex)
    centers = [phi.centers]
    widths = [phi.widths]
    jumps = [phi.jumps]
    for tj, z in zip(nodes.nodes, zs):
        wp = window_phase(z, delta).rescaled(shift=float(tj), scale=delta)
        centers.append(wp.centers)
        widths.append(wp.widths)
        jumps.append(wp.jumps)
    return SmoothPhase(
        centers=np.concatenate(centers),
        widths=np.concatenate(widths),
        jumps=np.concatenate(jumps),
        base_value=phi.base_value,
        domain=(0.0, 1.0),
        mollifier=phi.mollifier,
    )


def residual_T(zs, state: PipelineState, cfg: QuadratureConfig, check: bool = True):
    """The residual map T(z) = (integral f_k e^{i theta*_z})_k by direct quadrature.

    With `check` set, also evaluates the decomposition delta*Q(delta;z) + r
    and raises if the two disagree beyond 10x the quadrature tolerance.
    Returns (T, consistency_gap).
    """
    zs = np.asarray(zs, dtype=complex)
    theta = assemble_theta_star(zs, state.phi.phi, state.nodes, state.delta)
    full = IntervalMask.full()
    direct = np.array([integrate_against_phase(f, theta, full, cfg) for f in state.functions])
    gap = 0.0
    if check:
        decomposed = state.delta * compute_Q(state.functions, state.nodes, state.delta, zs, cfg) + state.phi.r
        gap = float(np.max(np.abs(direct - decomposed)))
        if gap > 10.0 * cfg.abs_tol:
            raise ConsistencyError(
                f"direct and decomposed residuals disagree by {gap:.3e} "
                f"(> 10x quadrature tolerance {cfg.abs_tol:.1e})",
                direct=direct,
                decomposed=decomposed,
            )
    return direct, gap


def brouwer_map(zs, state: PipelineState, cfg: QuadratureConfig):
    """The self-map z - M^{-1} T(z) / delta whose fixed points annihilate."""
    t, _ = residual_T(zs, state, cfg, check=False)
    return np.asarray(zs, dtype=complex) - (state.nodes.matrix_inverse @ t) / state.delta


def _project_polydisk(zs):
    out = np.asarray(zs, dtype=complex).copy()
    mags = np.abs(out)
    big = mags > 1.0
    out[big] /= mags[big]
    return out


def _lsq_fallback(state, cfg, z_start, options, budget):
    """Damped Gauss-Newton on ||T||^2 over the polydisk, multistart."""
    n = state.nodes.n
    rng_starts = [np.asarray(z_start, dtype=complex)]
    sampler = qmc.Sobol(d=2 * n, scramble=True, seed=options.seed + 1)
    extra = norm.ppf(np.clip(sampler.random(7), 1e-12, 1 - 1e-12)) * 0.4
    for row in extra:
        rng_starts.append(_project_polydisk(row[:n] + 1j * row[n:]))

    def t_of(x):
        z = _project_polydisk(x[:n] + 1j * x[n:])
        t, _ = residual_T(z, state, cfg, check=False)
        return np.concatenate([t.real, t.imag]), z

    best_z, best_res = None, math.inf
    evals = 0
    for start in rng_starts:
        x = np.concatenate([start.real, start.imag])
        r, z = t_of(x)
        res = float(np.max(np.abs(r)))
        while evals < budget:
            if res <= options.tol:
                return z, res
            h = 1e-6
            jac = np.empty((2 * n, 2 * n))
            for i in range(2 * n):
                xp = x.copy()
                xp[i] += h
                rp, _ = t_of(xp)
                jac[:, i] = (rp - r) / h
                evals += 1
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
            lam, moved = 1.0, False
            for _ in range(25):
                xn = x + lam * step
                rn, zn = t_of(xn)
                evals += 1
                resn = float(np.max(np.abs(rn)))
                if resn < res:
                    x, r, z, res = xn, rn, zn, resn
                    moved = True
                    break
                lam *= 0.5
            if not moved:
                break
        if res < best_res:
            best_z, best_res = z, res
        if best_res <= options.tol:
            return best_z, best_res
    return best_z, best_res


def solve_annihilator(fs, options: SolverOptions | None = None) -> AnnihilatorResult:
    """Run the full pipeline and return the annihilating phase with reports."""
    if options is None:
        options = SolverOptions()
    if not fs:
        raise ValueError("need at least one function")
    cfg = options.quadrature

    packed = False
    work = list(fs)
    if not options.no_pack and all(f.is_real for f in fs):
        work = pack_real_pairs(work)
        packed = True
    keep = independent_subset(work, tol=1e-12)
    if not keep:
        raise ValueError("all input functions are numerically zero")
    sub = [work[i] for i in keep]

    grid = options.candidate_grid or default_candidate_grid(sub)
    nodes = select_nodes(sub, grid)
    cert = find_delta(sub, nodes, cfg, options)
    phic = build_phi(sub, nodes, cert.delta, cfg, options)
    state = PipelineState(functions=tuple(sub), nodes=nodes, certificate=cert, phi=phic)

    n = nodes.n
    inv = nodes.matrix_inverse
    z = np.zeros(n, dtype=complex)
    best_z, best_res = z, math.inf
    consistency_max = 0.0
    iterations = 0
    since_best = 0
    converged = False
    for _ in range(options.max_iterations):
        t, gap = residual_T(z, state, cfg, check=options.check_decomposition)
        consistency_max = max(consistency_max, gap)
        iterations += 1
        res = float(np.max(np.abs(t)))
        if res < best_res:
            best_z, best_res = z.copy(), res
            since_best = 0
        else:
            since_best += 1
        if res <= options.tol:
            converged = True
            break
        if since_best >= 20:
            break
        z = _project_polydisk(z - options.damping * (inv @ t) / cert.delta)

    if not converged:
        z_fb, res_fb = _lsq_fallback(state, cfg, best_z, options, budget=1500)
        if res_fb < best_res:
            best_z, best_res = z_fb, res_fb
        converged = best_res <= options.tol
        z = best_z

    if not converged:
        raise SolverFailure(
            f"fixed-point iteration and fallback exhausted (best residual {best_res:.3e}); "
            "a fixed point exists, increase the budget",
            best=best_z,
            best_residual=best_res,
        )

    z0 = best_z
    t_final, gap = residual_T(z0, state, cfg, check=options.check_decomposition)
    consistency_max = max(consistency_max, gap)
    theta = assemble_theta_star(z0, phic.phi, nodes, cert.delta)

    full = IntervalMask.full()
    input_residuals = np.array([integrate_against_phase(f, theta, full, cfg) for f in work])

    from .sobolev import sobolev_report

    report = sobolev_report(theta, p=1.0, n=n, cfg=cfg)
    return AnnihilatorResult(
        z0=z0,
        theta=theta,
        residuals=t_final,
        input_residuals=input_residuals,
        norm_report=report,
        state=state,
        kept_indices=tuple(keep),
        packed=packed,
        iterations=iterations,
        consistency_max=consistency_max,
    )
