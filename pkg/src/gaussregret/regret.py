"""Minimax regret R*(A) = log (2 pi)^{-n/2} int exp(-dist^2(x, A) / 2) dx.

Three routes, tried in this order by :func:`regret`:

* closed forms (convex bodies with known intrinsic volumes, two-point sets,
  products, dilations and translates of these);
* tensor-grid midpoint quadrature on the bounding box inflated by
  m = sqrt(2 log(1/tol)) + sqrt(n) + 2, for n <= 4;
* Monte Carlo through E exp(sup_theta [<theta, X> - |theta|^2 / 2]) with X
  standard Gaussian, averaged in the log domain with batch-means errors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.spatial import HalfspaceIntersection, QhullError
from scipy.special import gammainc, log_ndtr, logsumexp, ndtr

from . import sets as S
from ._numerics import LOG_2PI, SQRT_2PI, ConvergenceError, batch_sizes, rng_for
from .estimate import MCConfig, RegretEstimate
from .intrinsic import exact_volumes, regret_from_volumes

__all__ = [
    "RegretEstimate", "MCConfig", "regret_exact", "regret_quadrature", "regret_mc",
    "regret", "two_point_regret", "mixture_upper_bound", "width_bounds",
    "regret_at_noise", "regret_repeated", "large_scale_report", "QUAD_MAX_DIM",
    "regret_cells", "cell_masses_1d",
]

QUAD_MAX_DIM = 4
_MC_CHUNK = 1 << 16


def two_point_regret(rho: float) -> float:
    """R*({theta_1, theta_2}) = log(2 Phi(rho / 2)) with rho = |theta_1 - theta_2|."""
    return math.log(2.0) + float(log_ndtr(0.5 * rho))


def _exact_value(spec: S.SetSpec) -> float:
    if isinstance(spec, S.Translate):
        return _exact_value(spec.inner)
    if isinstance(spec, S.Product):
        return sum(_exact_value(p) for p in spec.parts)
    if isinstance(spec, S.FinitePoints) and spec.size <= 2:
        if spec.size == 1:
            return 0.0
        return two_point_regret(float(np.linalg.norm(spec.points[1] - spec.points[0])))
    if isinstance(spec, S.Scale):
        inner = spec.inner
        if isinstance(inner, S.FinitePoints) and inner.size <= 2:
            return _exact_value(S.FinitePoints(spec.factor * inner.points))
        if isinstance(inner, (S.Product, S.Translate, S.Scale)):
            return _exact_value(_push_scale(spec.factor, inner))
    if isinstance(spec, (S.Union, S.MinkowskiSum)) and len(spec.parts) == 1:
        return _exact_value(spec.parts[0])
    P = S.as_points(spec)
    if P is not None and P.shape[1] == 1:
        return float(logsumexp(np.log(cell_masses_1d(P[:, 0]))))
    return regret_from_volumes(exact_volumes(spec)).value


def _push_scale(t: float, spec: S.SetSpec) -> S.SetSpec:
    """Move a dilation inside Product/Translate so parts can be handled separately."""
    if isinstance(spec, S.Product):
        return S.Product(tuple(S.Scale(t, p) for p in spec.parts))
    if isinstance(spec, S.Translate):
        return S.Translate(t * spec.by, S.Scale(t, spec.inner))
    if isinstance(spec, S.Scale):
        return S.Scale(t * spec.factor, spec.inner)
    return S.Scale(t, spec)


def regret_exact(spec: S.SetSpec) -> RegretEstimate:
    """Closed-form regret; raises UnsupportedComposition when none is known."""
    return RegretEstimate(float(_exact_value(spec)), "exact")


def _box_mass(lengths: np.ndarray, m: float) -> tuple[float, float]:
    """Gaussian-normalized mass of a box's integrand, total and inside the m-inflation."""
    ell = lengths / SQRT_2PI
    total = float(np.prod(1.0 + ell))
    inside = float(np.prod(ell + 1.0 - 2.0 * ndtr(-m)))
    return total, inside


def regret_quadrature(spec: S.SetSpec, tol: float = 1e-6, max_points: int = 40_000_000,
                      min_levels: int = 2) -> RegretEstimate:
    """Midpoint tensor-grid quadrature, step halved until successive values
    agree to ``tol``.

    The neglected tail outside the inflated box is bounded by the same
    integral for the bounding box itself, which is explicit.  The reported
    half-width is tol plus that tail bound (relative, hence on the log scale).
    """
    n = spec.dim
    if n > QUAD_MAX_DIM:
        raise ValueError(f"quadrature supports n <= {QUAD_MAX_DIM}, got {n}")
    if not 0 < tol < 1:
        raise ValueError("tol must be in (0, 1)")
    m = math.sqrt(2.0 * math.log(1.0 / tol)) + math.sqrt(n) + 2.0
    lo, hi = spec.bbox()
    lo, hi = lo - m, hi + m
    span = hi - lo
    per_axis0 = {1: 256, 2: 96, 3: 32, 4: 16}[n]
    h = float(span.max()) / per_axis0
    prev = None
    levels = 0
    while True:
        ks = np.maximum(np.ceil(span / h).astype(int), 1)
        npts = int(np.prod(ks))
        if npts > max_points:
            raise ConvergenceError(
                f"quadrature did not reach tol={tol} within {max_points} grid points")
        value = _midpoint_log_integral(spec, lo, hi, ks)
        levels += 1
        if prev is not None and levels >= min_levels and abs(value - prev) < tol:
            break
        prev = value
        h /= 2.0
    total, inside = _box_mass(spec.bbox()[1] - spec.bbox()[0], m)
    tail = (total - inside) / math.exp(value)
    return RegretEstimate(value, "quadrature", tol + math.log1p(tail), samples=npts)


def _midpoint_log_integral(spec, lo, hi, ks) -> float:
    n = spec.dim
    steps = (hi - lo) / ks
    axes = [lo[i] + (np.arange(ks[i]) + 0.5) * steps[i] for i in range(n)]
    log_cell = float(np.sum(np.log(steps)))
    # iterate over the first axis in slabs to bound memory
    rest = int(np.prod(ks[1:])) if n > 1 else 1
    slab = max(1, (1 << 20) // rest)
    tail_grid = np.stack(np.meshgrid(*axes[1:], indexing="ij"), -1).reshape(-1, n - 1) if n > 1 else None
    parts = []
    for s in range(0, ks[0], slab):
        x0 = axes[0][s:s + slab]
        if n == 1:
            G = x0[:, None]
        else:
            G = np.concatenate([np.repeat(x0, rest)[:, None], np.tile(tail_grid, (x0.size, 1))], axis=1)
        parts.append(logsumexp(-0.5 * spec._dist2(G)))
    return float(logsumexp(parts)) + log_cell - 0.5 * n * LOG_2PI


def _mc_center(spec: S.SetSpec) -> np.ndarray:
    # R* is translation invariant; the likelihood-ratio weights have variance
    # of order exp(|theta|^2), so draws are centred in the bounding box
    lo, hi = spec.bbox()
    return 0.5 * (np.asarray(lo, dtype=float) + np.asarray(hi, dtype=float))


def _mc_batch(spec: S.SetSpec, seed: int, b: int, m: int) -> float:
    """log-mean-exp of sup_quadratic(A - c) over m Gaussian draws for batch b."""
    rng = rng_for(seed, b)
    n = spec.dim
    c = _mc_center(spec)
    acc = []
    for s in range(0, m, _MC_CHUNK):
        X = rng.standard_normal((min(_MC_CHUNK, m - s), n))
        q = 0.5 * (np.einsum("ij,ij->i", X, X) - spec._dist2(X + c))
        acc.append(logsumexp(q))
    return float(logsumexp(acc)) - math.log(m)


def regret_mc(spec: S.SetSpec, cfg: MCConfig | None = None) -> RegretEstimate:
    """Monte Carlo regret via the Gaussian representation.

    At least 16 batches are used.  Batch b draws from the stream seeded by
    (seed, b), so results do not depend on the worker count.
    """
    cfg = cfg or MCConfig()
    B = max(cfg.batches, 16) if cfg.samples >= 16 else cfg.batches
    sizes = batch_sizes(cfg.samples, B)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            lme = list(ex.map(lambda bm: _mc_batch(spec, cfg.seed, *bm), enumerate(sizes)))
    else:
        lme = [_mc_batch(spec, cfg.seed, b, m) for b, m in enumerate(sizes)]
    lme = np.array(lme)
    w = np.array(sizes, dtype=float)
    grand = float(logsumexp(lme, b=w / w.sum()))
    # batch means on the natural scale, normalized by the grand mean
    ratios = np.exp(lme - grand)
    se_log = float(np.std(ratios, ddof=1) / math.sqrt(B))
    flags = ()
    if se_log == 0.0:
        flags = ("degenerate_se",)
    return RegretEstimate(grand, "monte_carlo", 2.0 * se_log, cfg.samples, cfg.seed, flags)


# ------------------------------------------------ finite sets, cell by cell
#
# For finite A, exp R*(A) = sum_i P(theta_i + Z in V_i) with V_i the Voronoi
# cell of theta_i: on V_i the integrand is the density of N(theta_i, I).

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_NODES_LO, _GL_WEIGHTS_LO = np.polynomial.legendre.leggauss(32)
_CELL_BOX = 40.0    # beyond this radius a standard Gaussian has mass < e^{-800}


def cell_masses_1d(x: np.ndarray) -> np.ndarray:
    """P(x_i + Z in cell_i) for distinct reals x."""
    x = np.sort(np.unique(np.asarray(x, dtype=float)))
    if x.size == 1:
        return np.ones(1)
    half = 0.5 * np.diff(x)
    left = np.concatenate([[np.inf], half])
    right = np.concatenate([half, [np.inf]])
    # P(-left < Z <= right) = 1 - Phi(-left) - Phi(-right)
    return 1.0 - ndtr(-left) - ndtr(-right)


def _cell_mass_2d(D: np.ndarray) -> tuple[float, float]:
    """Gaussian mass of {x : <x, d_j> <= |d_j|^2/2} (clipped to a large box),
    summed over fan triangles from the origin with Gauss-Legendre per edge.

    Returns (mass, error estimate from the 32- vs 64-node rules).
    """
    c = 0.5 * np.sum(D * D, axis=1)
    box = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    A = np.vstack([D, box])
    b = np.concatenate([-c, np.full(4, -_CELL_BOX)])
    hs = HalfspaceIntersection(np.hstack([A, b[:, None]]), np.zeros(2))
    V = hs.intersections
    ang = np.unique(np.round(np.mod(np.arctan2(V[:, 1], V[:, 0]), 2 * np.pi), 15))
    ang = np.concatenate([ang, [ang[0] + 2 * np.pi]])
    total = total_lo = 0.0
    nrm = np.linalg.norm(A, axis=1)
    for a0, a1 in zip(ang[:-1], ang[1:]):
        if a1 - a0 < 1e-15:
            continue
        mid = 0.5 * (a0 + a1)
        u = np.array([math.cos(mid), math.sin(mid)])
        # the active edge along the middle ray is the closest halfplane
        s = A @ u
        with np.errstate(divide="ignore"):
            t = np.where(s > 0, -b / s, np.inf)
        j = int(np.argmin(t))
        h, psi = -b[j] / nrm[j], math.atan2(A[j, 1], A[j, 0])

        def rule(nodes, weights):
            phi = mid + 0.5 * (a1 - a0) * nodes
            R = h / np.cos(phi - psi)
            return 0.5 * (a1 - a0) * float(np.dot(weights, -np.expm1(-0.5 * R * R)))

        total += rule(_GL_NODES, _GL_WEIGHTS)
        total_lo += rule(_GL_NODES_LO, _GL_WEIGHTS_LO)
    return total / (2 * np.pi), abs(total - total_lo) / (2 * np.pi)


def _radial_cell_batch(P: np.ndarray, U: np.ndarray) -> float:
    """sum_i E_u F_n(R_i(u)^2) over the directions U, F_n the chi-square cdf."""
    k, n = P.shape
    acc = 0.0
    for i in range(k):
        D = np.delete(P, i, axis=0) - P[i]
        c = 0.5 * np.sum(D * D, axis=1)
        s = U @ D.T
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(s > 0, c / s, np.inf).min(axis=1)
        acc += float(np.mean(np.where(np.isfinite(R), gammainc(0.5 * n, 0.5 * R * R), 1.0)))
    return acc


def regret_cells(spec: S.SetSpec, cfg: MCConfig | None = None) -> RegretEstimate:
    """Regret of a finite set by integrating over Voronoi cells.

    n = 1: closed form.  n = 2: each cell is a polygon and its Gaussian mass a
    sum of one-dimensional angular integrals (Gauss-Legendre on every edge).
    n >= 3: Monte Carlo over uniform directions, integrating the radial part
    exactly with the chi-square distribution function.
    """
    P = S.as_points(spec)
    if P is None:
        raise S.UnsupportedComposition(f"{spec.kind} is not a finite set")
    k, n = P.shape
    if k == 1:
        return RegretEstimate(0.0, "exact")
    if n == 1:
        return RegretEstimate(float(logsumexp(np.log(cell_masses_1d(P[:, 0])))), "exact")
    if n == 2:
        masses, errs = [], []
        for i in range(k):
            try:
                m, e = _cell_mass_2d(np.delete(P, i, axis=0) - P[i])
            except QhullError as exc:
                raise ConvergenceError(f"cell {i}: {exc}") from exc
            masses.append(m)
            errs.append(e)
        W = float(np.sum(masses))
        err = float(np.sum(errs)) + 1e-13 * k
        return RegretEstimate(math.log(W), "quadrature", err / W, samples=64 * k)
    cfg = cfg or MCConfig(samples=20_000)
    B = max(cfg.batches, 16)
    sizes = batch_sizes(cfg.samples, B)
    vals = []
    for b, m in enumerate(sizes):
        U = rng_for(cfg.seed, 7, b).standard_normal((m, n))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        vals.append(_radial_cell_batch(P, U))
    vals = np.array(vals)
    w = np.array(sizes, dtype=float)
    W = float(np.sum(vals * w) / w.sum())
    se_log = float(np.std(vals, ddof=1) / math.sqrt(B)) / W
    return RegretEstimate(math.log(W), "monte_carlo", 2.0 * se_log, cfg.samples, cfg.seed)


def regret(spec: S.SetSpec, method: str = "auto", tol: float = 1e-6,
           cfg: MCConfig | None = None) -> RegretEstimate:
    """Dispatch exact -> quadrature (n <= 4) -> Monte Carlo, or force a method."""
    if method == "exact":
        return regret_exact(spec)
    if method == "cells":
        return regret_cells(spec, cfg)
    if method == "quadrature":
        return regret_quadrature(spec, tol)
    if method in ("mc", "monte_carlo"):
        return regret_mc(spec, cfg)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    try:
        return regret_exact(spec)
    except S.UnsupportedComposition:
        pass
    if S.as_points(spec) is not None and (spec.dim == 2 or method == "auto"):
        try:
            return regret_cells(spec, cfg)
        except ConvergenceError:
            pass
    if spec.dim <= QUAD_MAX_DIM:
        try:
            return regret_quadrature(spec, tol)
        except ConvergenceError:
            pass
    return regret_mc(spec, cfg)


def mixture_upper_bound(parts, part_regrets) -> RegretEstimate:
    """R*(A_1 u ... u A_N) <= max_i R*(A_i) + log N."""
    parts = list(parts)
    part_regrets = list(part_regrets)
    if len(parts) != len(part_regrets) or not parts:
        raise ValueError("need one regret per part")
    if len({p.dim for p in parts}) != 1:
        raise S.DimensionMismatch("parts differ in dimension")
    i = int(np.argmax([r.value for r in part_regrets]))
    hw = max(r.half_width for r in part_regrets)
    return RegretEstimate(part_regrets[i].value + math.log(len(parts)), "bound_upper", hw)


def width_bounds(spec: S.SetSpec, w_est: float, diam: float | None = None,
                 radius: float | None = None) -> tuple[float, float]:
    """Elementary bounds from the Gaussian width w = E sup <theta, X>.

    Upper: R* <= w.  Lower: R* >= w - r^2 / 2 for A inside a ball of radius
    r (r = diam by default), and R* >= log(1 + w) for convex A.
    """
    if radius is None:
        radius = S.diameter(spec) if diam is None else diam
    lower = w_est - 0.5 * radius ** 2
    if spec.is_convex:
        lower = max(lower, math.log1p(w_est))
    return lower, w_est


def regret_at_noise(spec: S.SetSpec, sigma: float, **kw) -> RegretEstimate:
    """Regret for noise level sigma: R*(A / sigma)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return regret(spec if sigma == 1 else _push_scale(1.0 / sigma, spec), **kw)


def regret_repeated(spec: S.SetSpec, n_rep: int, **kw) -> RegretEstimate:
    """Regret with n_rep i.i.d. observations: R*(sqrt(n_rep) A)."""
    if n_rep < 1:
        raise ValueError("n_rep must be >= 1")
    return regret(spec if n_rep == 1 else _push_scale(math.sqrt(n_rep), spec), **kw)


def large_scale_report(spec: S.SetSpec, t: float, method: str = "auto", tol: float = 1e-8,
                       cfg: MCConfig | None = None) -> dict:
    """R*(tA) - n log t against log vol(A / sqrt(2 pi)).

    Also reports the same comparison for the Wills normalization,
    log W(tA) - n log t against log vol(A), where W(tA) = exp R*(sqrt(2 pi) tA).
    """
    n = spec.dim
    vol = S.volume(spec)
    if vol <= 0:
        raise ValueError("large-scale limit needs positive volume")
    r = regret(_push_scale(t, spec), method=method, tol=tol, cfg=cfg)
    rw = regret(_push_scale(SQRT_2PI * t, spec), method=method, tol=tol, cfg=cfg)
    log_vol_g = math.log(vol) - 0.5 * n * LOG_2PI
    lhs = r.value - n * math.log(t)
    lhs_w = rw.value - n * math.log(t)
    return {
        "t": t,
        "regret_minus_nlogt": lhs,
        "log_vol_gaussian": log_vol_g,
        "gap": abs(lhs - log_vol_g),
        "half_width": r.half_width,
        "method": r.method,
        "wills_minus_nlogt": lhs_w,
        "log_vol": math.log(vol),
        "wills_gap": abs(lhs_w - math.log(vol)),
    }
