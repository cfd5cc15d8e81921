"""Metric complexity: Gaussian widths, local widths, covering numbers and the
fixed points

    r*(A) = sup{r : w_A(r) >= r^2},    r~(A) = sup{r : log N(A, r) >= r^2},

where w_A(r) = sup_{theta in A} w(A ∩ B(theta, r)) and N(A, r) counts closed
r-balls centred in A.

Every curve is carried as a pair of bounds (lo, hi).  Closed forms give
lo = hi; Monte Carlo widths widen by three standard errors; covering numbers
come from packings (lo) and explicit covers (hi).  Fixed points and infima are
then bracketed rigorously from the bounds using the monotonicity of w_A
(non-decreasing) and log N (non-increasing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.special import gammaln

from . import sets as S
from ._numerics import SQRT_2PI, batch_means_se, batch_sizes, golden_section, rng_for
from .estimate import MCConfig

__all__ = [
    "WidthEstimate", "LocalWidth", "CoverPack", "ComplexityProfile",
    "gaussian_width_exact", "gaussian_width_mc", "gaussian_width", "ball_width",
    "local_width", "covering_packing", "gonzalez", "dense_sample",
    "covering_ellipsoid_bounds", "fixed_points", "inf_forms", "complexity_profile",
    "entropy_numbers", "phi_step", "l1_ball_ball_support",
]

Z3 = 3.0            # standard errors added to Monte Carlo width bounds
_NS_WIDTH = 101     # seed-key namespaces
_NS_LOCAL = 102
_EXACT_COVER_MAX = 40  # finite sets up to this size get MILP-exact covers


# ----------------------------------------------------------------- widths

@dataclass(frozen=True)
class WidthEstimate:
    value: float
    se: float = 0.0
    samples: int = 0
    seed: int | None = None
    method: str = "exact"

    @property
    def lo(self) -> float:
        return self.value - Z3 * self.se

    @property
    def hi(self) -> float:
        return self.value + Z3 * self.se


def ball_width(n: int, r: float = 1.0) -> float:
    """w(r B_2^n) = r E|X| = r sqrt(2) Gamma((n+1)/2) / Gamma(n/2)."""
    return float(r * math.sqrt(2.0) * math.exp(gammaln((n + 1) / 2.0) - gammaln(n / 2.0)))


def gaussian_width_exact(spec: S.SetSpec) -> float:
    """Closed-form widths; raises UnsupportedComposition otherwise."""
    if isinstance(spec, S.Point):
        return 0.0
    if isinstance(spec, S.FinitePoints) and spec.size <= 2:
        return 0.0 if spec.size == 1 else float(np.linalg.norm(spec.points[1] - spec.points[0])) / SQRT_2PI
    if isinstance(spec, S.Segment):
        return spec.length / SQRT_2PI
    if isinstance(spec, S.Ball):
        return ball_width(spec.dim, spec.radius)
    if isinstance(spec, S.Ellipsoid) and np.ptp(spec.axes) == 0:
        return ball_width(spec.dim, float(spec.axes[0]))
    if isinstance(spec, S.Box):
        return float(spec.sides.sum()) / SQRT_2PI
    if isinstance(spec, S.Scale):
        return spec.factor * gaussian_width_exact(spec.inner)
    if isinstance(spec, S.Translate):
        return gaussian_width_exact(spec.inner)
    if isinstance(spec, (S.Product, S.MinkowskiSum)):
        return sum(gaussian_width_exact(p) for p in spec.parts)
    raise S.UnsupportedComposition(f"no closed-form width for {spec.kind}")


def gaussian_width_mc(spec: S.SetSpec, cfg: MCConfig | None = None) -> WidthEstimate:
    """Mean of the support function at standard Gaussian points."""
    cfg = cfg or MCConfig(samples=100_000)
    sizes = batch_sizes(cfg.samples, cfg.batches)
    c = spec.symmetry_center
    means = []
    for b, m in enumerate(sizes):
        X = rng_for(cfg.seed, _NS_WIDTH, b).standard_normal((m, spec.dim))
        h = S.support(spec, X)
        if c is not None:
            # E<c, X> = 0; subtracting it removes a pure-noise term
            h = h - X @ c
        means.append(float(np.mean(h)))
    mean, se = batch_means_se(np.array(means), np.array(sizes))
    return WidthEstimate(mean, se, cfg.samples, cfg.seed, "monte_carlo")


def gaussian_width(spec: S.SetSpec, cfg: MCConfig | None = None) -> WidthEstimate:
    try:
        return WidthEstimate(gaussian_width_exact(spec))
    except S.UnsupportedComposition:
        return gaussian_width_mc(spec, cfg)


def l1_ball_ball_support(X: np.ndarray, alpha: float, r: float, method: str = "exact") -> np.ndarray:
    """Support function of alpha B_1 ∩ r B_2 at the rows of X.

    h(x) = min_{m >= 0} [alpha m + r |(|x| - m)_+|_2], a convex 1-d problem.
    ``method="golden"`` runs a vectorized golden-section search on
    [0, max|x_i|]; ``"exact"`` minimizes in closed form on each interval
    between consecutive order statistics of |x|, where the objective is
    alpha m + r sqrt(S2 - 2 m S1 + k m^2).
    """
    A = np.abs(np.atleast_2d(np.asarray(X, dtype=float)))
    if method == "golden":
        def f(m):
            return alpha * m + r * np.linalg.norm(np.maximum(A - m[:, None], 0.0), axis=1)

        _, val = golden_section(f, np.zeros(A.shape[0]), A.max(axis=1), tol=1e-12)
        return val
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    Xs = -np.sort(-A, axis=1)
    d = Xs.shape[1]
    k = np.arange(1, d + 1, dtype=float)
    S1 = np.cumsum(Xs, axis=1)
    S2 = np.cumsum(Xs * Xs, axis=1)
    upper = Xs
    lower = np.concatenate([Xs[:, 1:], np.zeros((Xs.shape[0], 1))], axis=1)
    V = np.maximum(S2 - S1 * S1 / k, 0.0)
    den = r * r - alpha * alpha / k
    with np.errstate(divide="ignore", invalid="ignore"):
        u = alpha * np.sqrt(V / den)
        m_star = np.where(den > 0, (S1 - u) / k, upper)
    m = np.clip(m_star, lower, upper)

    def f(m):
        return alpha * m + r * np.sqrt(np.maximum(S2 - 2 * m * S1 + k * m * m, 0.0))

    vals = np.minimum(f(m), np.minimum(f(lower), f(upper)))
    return vals.min(axis=1)


# ------------------------------------------------------------- coverings

def gonzalez(P: np.ndarray, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Farthest-point traversal.

    Returns (order, radii) where radii[i] is the distance of the i-th inserted
    point to the previously inserted ones (radii[0] = inf).  The first k points
    cover P at radius radii[k] and are pairwise at distance >= radii[k-1].
    """
    k = P.shape[0]
    order = np.empty(k, dtype=int)
    radii = np.empty(k)
    order[0], radii[0] = start, np.inf
    d = np.linalg.norm(P - P[start], axis=1)
    for i in range(1, k):
        j = int(np.argmax(d))
        order[i], radii[i] = j, d[j]
        d = np.minimum(d, np.linalg.norm(P - P[j], axis=1))
    return order, radii


def _greedy_packing(P: np.ndarray, r: float, D: np.ndarray | None = None) -> np.ndarray:
    """Maximal r-separated subset (distances > r), scanning rows in order."""
    chosen: list[int] = []
    for i in range(P.shape[0]):
        if not chosen:
            chosen.append(i)
            continue
        di = D[i, chosen] if D is not None else np.linalg.norm(P[chosen] - P[i], axis=1)
        if np.all(di > r):
            chosen.append(i)
    return np.array(chosen, dtype=int)


def _greedy_cover(D: np.ndarray, r: float) -> int:
    """Greedy set cover by closed r-balls centred at the points."""
    M = D <= r
    uncovered = np.ones(D.shape[0], dtype=bool)
    count = 0
    while uncovered.any():
        gain = M[:, uncovered].sum(axis=1)
        j = int(np.argmax(gain))
        uncovered &= ~M[j]
        count += 1
    return count


def _exact_cover(D: np.ndarray, r: float) -> int | None:
    """Minimum number of closed r-balls centred at the points (MILP set cover).

    Returns None when the solver does not certify optimality.
    """
    M = (D <= r).astype(float)
    k = M.shape[0]
    res = milp(np.ones(k), constraints=LinearConstraint(M, lb=np.ones(k), ub=np.inf),
               integrality=np.ones(k), bounds=Bounds(0, 1),
               options={"time_limit": 10.0})
    if res.status != 0 or res.x is None:
        return None
    return int(round(res.fun))


@dataclass(frozen=True)
class CoverPack:
    r: float
    n_cover: int        # size of an explicit r-cover with centres in the set
    n_pack: int         # greedy maximal r-packing
    n_pack_2r: int      # greedy maximal 2r-packing: lower bound on N(r)
    eps: float = 0.0    # sample density for continuous sets (0 for finite)

    @property
    def log_lower(self) -> float:
        return math.log(self.n_pack_2r)

    @property
    def log_upper(self) -> float:
        """Upper bound on log N(A, r + eps)."""
        return math.log(self.n_cover)


def covering_packing(points, r: float, eps: float = 0.0) -> CoverPack:
    """Cover/packing counts on a finite point set.

    n_cover = min(greedy set cover, greedy r-packing size), so that
    n_pack_2r <= N(r) <= n_cover <= n_pack.  For an eps-dense sample of a
    continuous set, n_pack_2r bounds N(A, r) from below and n_cover bounds
    N(A, r + eps) from above.
    """
    P = points.points if isinstance(points, S.FinitePoints) else np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise ValueError("covering_packing needs a non-empty point set")
    # greedy scans are order dependent; fix lexicographic order
    P = P[np.lexsort(P.T[::-1])]
    D = squareform(pdist(P)) if P.shape[0] <= 3000 else None
    pack = _greedy_packing(P, r, D)
    pack2 = _greedy_packing(P, 2.0 * r, D)
    cover = pack.size
    if D is not None:
        cover = min(cover, _greedy_cover(D, r))
    return CoverPack(float(r), int(cover), int(pack.size), int(pack2.size), float(eps))


def dense_sample(spec: S.SetSpec, eps: float, max_points: int = 200_000) -> np.ndarray:
    """An eps-dense subset of a convex spec (n <= 3): grid points within
    eps of the set, projected onto it.  Projection is 1-Lipschitz, so every
    point of the set lies within eps of the sample."""
    n = spec.dim
    step = 2.0 * eps / math.sqrt(n)
    lo, hi = spec.bbox()
    ks = np.maximum(np.ceil((hi - lo) / step).astype(int) + 1, 1)
    if np.prod(ks) > max_points:
        raise ValueError("sample too large; increase eps")
    axes = [lo[i] - step / 2 + step * np.arange(ks[i] + 1) for i in range(n)]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    near = S.dist2(spec, G) <= eps ** 2
    Q = S.project(spec, G[near])
    return np.unique(np.round(Q, 12), axis=0)


def covering_ellipsoid_bounds(a, r: float) -> tuple[float, float]:
    """Bounds on log N(E_a, r) from the classical ellipsoid covering estimate

        log N(E, 5 rho) <= sum_{a_i >= 2 rho} log(a_i / rho) <= log N(E, rho).

    Returns (sum at rho = r, sum at rho = r/5): a lower and an upper bound
    on log N(E_a, r).  The first entry also bounds log N(E_a, 5r) from above.
    """
    a = np.asarray(a, dtype=float)
    r = float(r)
    if not r > 0:
        raise ValueError("r must be positive")
    lo = float(np.sum(np.log(a[a >= 2 * r] / r)))
    rho = r / 5.0
    hi = float(np.sum(np.log(a[a >= 2 * rho] / rho)))
    return lo, hi


# ------------------------------------------------------------ the models
#
# A model exposes vectorized bounds on w_A(r) and log N(A, r).  For finite
# sets the bounds are step functions whose breakpoints are all known, so they
# are constant between consecutive breakpoints ("exact steps").

class _Model:
    convex = False
    exact_steps = False
    lower_bound_only = False

    def __init__(self, dim: int, diam: float):
        self.dim = dim
        self.diam = diam

    def width_global(self) -> tuple[float, float]:
        lo, hi, _ = self.local(np.array([max(self.diam, 1e-300)]))
        return float(lo[0]), float(hi[0])

    def local(self, r):  # -> (lo, hi, se)
        raise NotImplementedError

    def logn(self, r):  # -> (lo, hi)
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        return np.array([])


class _PointModel(_Model):
    exact_steps = True
    convex = True

    def local(self, r):
        z = np.zeros(np.size(r))
        return z, z, z

    def logn(self, r):
        z = np.zeros(np.size(r))
        return z, z


class _ScaledModel(_Model):
    def __init__(self, inner: _Model, t: float):
        super().__init__(inner.dim, inner.diam * t)
        self.inner, self.t = inner, t
        self.convex = inner.convex
        self.exact_steps = inner.exact_steps
        self.lower_bound_only = inner.lower_bound_only

    def local(self, r):
        lo, hi, se = self.inner.local(np.asarray(r, dtype=float) / self.t)
        return self.t * lo, self.t * hi, self.t * se

    def logn(self, r):
        return self.inner.logn(np.asarray(r, dtype=float) / self.t)

    def breakpoints(self):
        return self.t * self.inner.breakpoints()


class _FiniteModel(_Model):
    """Finite point sets: nested-subset widths around each candidate centre."""

    exact_steps = True

    def __init__(self, P: np.ndarray, cfg: MCConfig, center_budget: int = 64):
        k, n = P.shape
        D = squareform(pdist(P)) if k > 1 else np.zeros((1, 1))
        super().__init__(n, float(D.max()))
        self.P, self.D = P, D
        order, radii = gonzalez(P)
        self.radii = radii
        if k <= center_budget:
            centers = np.arange(k)
        else:
            centers = np.sort(order[:center_budget])
            self.lower_bound_only = True
        self.centers = centers
        sizes = batch_sizes(cfg.samples, cfg.batches)
        B = len(sizes)
        # per centre: sorted distances and prefix widths (per batch means)
        self._dists, self._w, self._se = [], [], []
        Xs = [rng_for(cfg.seed, _NS_LOCAL, b).standard_normal((m, n)) for b, m in enumerate(sizes)]
        for c in centers:
            idx = np.argsort(D[c], kind="stable")
            d = D[c, idx]
            Q = P[idx] - P[c]
            bm = np.empty((B, k))
            for b, X in enumerate(Xs):
                H = np.maximum.accumulate(X @ Q.T, axis=1)
                bm[b] = H.mean(axis=0)
            sz = np.array(sizes, dtype=float)
            w = (bm * sz[:, None]).sum(axis=0) / sz.sum()
            se = bm.std(axis=0, ddof=1) / math.sqrt(B)
            # subsets of one or two points have closed-form widths
            w[0], se[0] = 0.0, 0.0
            if k > 1:
                w[1], se[1] = d[1] / SQRT_2PI, 0.0
            self._dists.append(d)
            self._w.append(w)
            self._se.append(se)
        self._cover_cache: dict[float, tuple[int | None, int]] = {}
        self._levels = np.unique(np.concatenate([[0.0], D[np.triu_indices(k, 1)]]))
        off = D + np.diag(np.full(k, np.inf))
        self._dmin = float(off.min()) if k > 1 else 0.0
        self._cheb = float(D.max(axis=1).min())

    def _prefix(self, ci: int, r: np.ndarray) -> np.ndarray:
        # number of points within closed distance r of the centre
        return np.searchsorted(self._dists[ci], r, side="right") - 1

    def local(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        lo = np.zeros(r.size)
        hi = np.zeros(r.size)
        val = np.full(r.size, -np.inf)
        se = np.zeros(r.size)
        for ci in range(len(self.centers)):
            j = self._prefix(ci, r)
            w, s = self._w[ci][j], self._se[ci][j]
            better = w > val
            val = np.where(better, w, val)
            se = np.where(better, s, se)
            lo = np.maximum(lo, w - Z3 * s)
            hi = np.maximum(hi, w + Z3 * s)
        return np.maximum(lo, 0.0), hi, se

    def point_local(self, r):
        """Point estimate of w_A(r) and the centre index attaining it."""
        r = float(r)
        best, arg, se = -np.inf, 0, 0.0
        for ci in range(len(self.centers)):
            j = int(self._prefix(ci, np.array([r]))[0])
            if self._w[ci][j] > best:
                best, arg, se = float(self._w[ci][j]), int(self.centers[ci]), float(self._se[ci][j])
        return best, arg, se

    def logn(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        lo = np.log(np.maximum((self.radii[:, None] > 2 * r[None, :]).sum(axis=0), 1))
        # no ball holds two points below the minimum separation, and a single
        # ball suffices only from the (in-set) Chebyshev radius on
        lo = np.where(r < self._dmin, math.log(self.P.shape[0]), lo)
        lo = np.where(r < self._cheb, np.maximum(lo, math.log(2.0)), lo)
        hi_g = (self.radii[:, None] > r[None, :]).sum(axis=0)
        hi = np.empty(r.size)
        for i, (ri, g) in enumerate(zip(r, hi_g)):
            k = self.P.shape[0]
            if k <= 400 and g > 1:
                # N is constant between consecutive pairwise distances
                key = float(self._levels[np.searchsorted(self._levels, ri, side="right") - 1]) \
                    if k <= _EXACT_COVER_MAX else float(ri)
                if key not in self._cover_cache:
                    exact = _exact_cover(self.D, key) if k <= _EXACT_COVER_MAX else None
                    self._cover_cache[key] = (exact, _greedy_cover(self.D, key) if exact is None else exact)
                exact, greedy = self._cover_cache[key]
                g = min(g, greedy)
                if exact is not None:
                    lo[i] = math.log(exact)
            hi[i] = math.log(max(g, 1))
        return lo, hi

    def breakpoints(self):
        parts = [self.radii[1:], self.radii[1:] / 2.0]
        if self.P.shape[0] <= 400:
            parts.append(pdist(self.P))
        else:
            parts += [d[1:] for d in self._dists]
        b = np.unique(np.concatenate(parts)) if parts else np.array([])
        return b[b > 0]


class _EllipsoidModel(_Model):
    """Axis-aligned ellipsoid: local widths by the comparison ellipsoid with
    axes min(a_i, r) and covering numbers by the classical volume estimate."""

    convex = True

    def __init__(self, a: np.ndarray, cfg: MCConfig):
        super().__init__(a.size, 2.0 * float(a.max()))
        self.a = np.asarray(a, dtype=float)
        sizes = batch_sizes(cfg.samples, cfg.batches)
        self._X = [rng_for(cfg.seed, _NS_LOCAL, b).standard_normal((m, a.size)) for b, m in enumerate(sizes)]
        self._sizes = np.array(sizes, dtype=float)

    def _wL(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        L = np.minimum(self.a[None, :], r[:, None])
        bm = np.array([np.linalg.norm(X[:, None, :] * L[None, :, :], axis=2).mean(axis=0) for X in self._X])
        w = (bm * self._sizes[:, None]).sum(axis=0) / self._sizes.sum()
        se = bm.std(axis=0, ddof=1) / math.sqrt(len(self._X))
        return w, se, np.sqrt((L ** 2).sum(axis=1))

    def local(self, r):
        w, se, s = self._wL(r)
        # w(L) <= w(E ∩ rB) <= sqrt(2) w(L), and w(L) <= sqrt(sum min(a^2, r^2))
        r = np.atleast_1d(np.asarray(r, dtype=float))
        lo = np.maximum(w - Z3 * se, s / math.sqrt(3.0))
        hi = math.sqrt(2.0) * np.minimum(w + Z3 * se, s)
        # E ∩ rB = E = L once r >= max a_i
        wE, seE, _ = self._wL(np.array([np.inf]))
        cap = min(float(wE[0] + Z3 * seE[0]), math.sqrt(float(np.sum(self.a ** 2))))
        hi = np.where(r >= self.a.max(), w + Z3 * se, np.minimum(hi, ball_width(self.dim, 1.0) * r))
        hi = np.minimum(hi, cap)
        return lo, hi, se

    def point_local(self, r):
        w, se, _ = self._wL(r)
        return float(w[0]), None, float(se[0])

    def logn(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        amax = float(self.a.max())
        lo = np.array([covering_ellipsoid_bounds(self.a, x)[0] for x in r])
        hi = np.array([covering_ellipsoid_bounds(self.a, x)[1] for x in r])
        # one ball centred at 0 covers iff r >= a_max
        lo = np.where(r < amax, np.maximum(lo, math.log(2.0)), 0.0)
        hi = np.where(r >= amax, 0.0, hi)
        return lo, hi


class _BallModel(_Model):
    convex = True

    def __init__(self, n: int, R: float):
        super().__init__(n, 2.0 * R)
        self.n, self.R = n, R

    def local(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        w = ball_width(self.n, 1.0) * np.minimum(r, self.R)
        return w, w, np.zeros_like(w)

    def point_local(self, r):
        return float(self.local(r)[0][0]), None, 0.0

    def logn(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        lo = np.where(r < self.R, np.maximum(self.n * np.log(self.R / r), math.log(2.0)), 0.0)
        hi = np.where(r < self.R, self.n * np.log1p(2.0 * self.R / r), 0.0)
        return lo, hi


class _SegmentModel(_Model):
    convex = True
    exact_steps = False

    def __init__(self, n: int, L: float):
        super().__init__(n, L)
        self.L = L

    def local(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        w = np.minimum(self.L, 2.0 * r) / SQRT_2PI
        return w, w, np.zeros_like(w)

    def point_local(self, r):
        return float(self.local(r)[0][0]), None, 0.0

    def logn(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        N = np.maximum(np.ceil(self.L / (2.0 * r) - 1e-12), 1.0)
        v = np.log(N)
        return v, v


class _L1Model(_Model):
    """alpha B_1^d: widths of alpha B_1 ∩ r B_2 by Monte Carlo, coverings by
    volume (lower), vertex packing (lower) and Maurey's empirical method (upper)."""

    convex = True

    def __init__(self, alpha: float, d: int, cfg: MCConfig):
        super().__init__(d, 2.0 * alpha)
        self.alpha, self.d = alpha, d
        sizes = batch_sizes(cfg.samples, cfg.batches)
        self._X = [rng_for(cfg.seed, _NS_LOCAL, b).standard_normal((m, d)) for b, m in enumerate(sizes)]
        self._sizes = np.array(sizes, dtype=float)

    def _w(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        w = np.empty(r.size)
        se = np.empty(r.size)
        for i, x in enumerate(r):
            bm = []
            for X in self._X:
                if x * math.sqrt(1.0) >= self.alpha:
                    h = self.alpha * np.abs(X).max(axis=1)
                else:
                    h = l1_ball_ball_support(X, self.alpha, x)
                bm.append(h.mean())
            w[i], se[i] = batch_means_se(np.array(bm), self._sizes)
        return w, se

    def local(self, r):
        w, se = self._w(r)
        return np.maximum(w - Z3 * se, 0.0), w + Z3 * se, se

    def point_local(self, r):
        w, se = self._w(r)
        return float(w[0]), None, float(se[0])

    def logn(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        d, a = self.d, self.alpha
        log_vol = d * math.log(2.0 * a) - gammaln(d + 1)
        log_kd = 0.5 * d * math.log(math.pi) - gammaln(d / 2.0 + 1)
        vol_lo = log_vol - log_kd - d * np.log(r)
        lo = np.maximum(vol_lo, 0.0)
        lo = np.where(a * math.sqrt(2.0) > 2 * r, np.maximum(lo, math.log(2 * d)), lo)
        lo = np.where(r < a, np.maximum(lo, math.log(2.0)), 0.0)
        # averages of k vertices of alpha B_1 form an (alpha / sqrt k)-net
        k = np.minimum(np.ceil(a ** 2 / r ** 2), 1e12)
        maurey = np.where(k < 1e12, gammaln(2 * d + k) - gammaln(k + 1) - gammaln(2 * d), np.inf)
        vol_hi = d * np.log1p(2.0 * a / r)
        hi = np.where(r >= a, 0.0, np.minimum(maurey, vol_hi))
        return lo, hi


def _model_for(spec: S.SetSpec, cfg: MCConfig, center_budget: int) -> _Model:
    if isinstance(spec, S.Point) or (isinstance(spec, S.FinitePoints) and spec.size == 1):
        return _PointModel(spec.dim, 0.0)
    if isinstance(spec, S.FinitePoints):
        return _FiniteModel(spec.points, cfg, center_budget)
    if isinstance(spec, S.Ellipsoid):
        return _EllipsoidModel(spec.axes, cfg)
    if isinstance(spec, S.Ball):
        return _BallModel(spec.dim, spec.radius)
    if isinstance(spec, S.Segment):
        if spec.length == 0:
            return _PointModel(spec.dim, 0.0)
        return _SegmentModel(spec.dim, spec.length)
    if isinstance(spec, S.L1Ball):
        return _L1Model(spec.alpha, spec.d, cfg)
    if isinstance(spec, S.Scale):
        return _ScaledModel(_model_for(spec.inner, cfg, center_budget), spec.factor)
    if isinstance(spec, S.Translate):
        return _model_for(spec.inner, cfg, center_budget)
    raise S.UnsupportedComposition(f"no local-width route for {spec.kind}")


# ------------------------------------------------------------- local width

@dataclass(frozen=True)
class LocalWidth:
    r: float
    value: float
    lower: float
    upper: float
    se: float
    center: np.ndarray | None
    lower_bound_only: bool = False


def local_width(spec: S.SetSpec, r: float, center_budget: int = 64,
                cfg: MCConfig | None = None) -> LocalWidth:
    """w_A(r) with a bracket.

    FinitePoints: sup over candidate centres (all points when at most
    ``center_budget``, otherwise a farthest-point net; the result is then
    flagged as a lower bound).  Symmetric convex bodies use the centre.
    """
    cfg = cfg or MCConfig(samples=20_000)
    model = _model_for(spec, cfg, center_budget)
    inner, t, shift = _peel(spec)
    lo, hi, se = model.local(np.array([float(r)]))
    if hasattr(_base(model), "point_local"):
        val, ci, s = _base(model).point_local(float(r) / t)
        val, s = t * val, t * s
    else:
        val, ci, s = float(lo[0]), None, float(se[0])
    if isinstance(inner, S.FinitePoints) and ci is not None:
        center = t * inner.points[ci] + shift
    else:
        c = spec.symmetry_center
        center = None if c is None else np.asarray(c, dtype=float)
    val = min(max(val, float(lo[0])), float(hi[0]))
    return LocalWidth(float(r), float(val), float(lo[0]), float(hi[0]), float(s), center,
                      model.lower_bound_only)


def _base(model: _Model) -> _Model:
    while isinstance(model, _ScaledModel):
        model = model.inner
    return model


def _peel(spec: S.SetSpec):
    t, shift = 1.0, None
    acc = []
    while isinstance(spec, (S.Scale, S.Translate)):
        acc.append(spec)
        spec = spec.inner
    # compose the affine map x -> t x + shift from the inside out
    shift = np.zeros(spec.dim)
    for w in reversed(acc):
        if isinstance(w, S.Scale):
            t *= w.factor
            shift = w.factor * shift
        else:
            shift = shift + w.by
    return spec, t, shift


# ----------------------------------------------------------- fixed points

def phi_step(b: np.ndarray, v: np.ndarray) -> float:
    """sup{r >= 0 : g(r) >= r^2} for the step function g = v[k] on [b[k], b[k+1]).

    ``b`` has one more entry than ``v`` and may end with inf.
    """
    best = 0.0
    for k in range(v.size):
        if v[k] >= b[k] ** 2:
            best = max(best, min(math.sqrt(max(v[k], 0.0)), b[k + 1]))
    return best


def _bisect(pred, lo: float, hi: float, iters: int = 80) -> float:
    """Largest r in [lo, hi] with pred(r) true, pred monotone (true then false)."""
    if pred(hi):
        return hi
    lo = max(lo, 1e-12 * hi)
    if not pred(lo):
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return lo


@dataclass
class ComplexityProfile:
    radii: np.ndarray
    local_width: np.ndarray
    local_width_se: np.ndarray
    local_width_lo: np.ndarray
    local_width_hi: np.ndarray
    logN_lower: np.ndarray
    logN_upper: np.ndarray
    r_star: tuple
    r_tilde: tuple
    inf_regret_form: tuple
    inf_red_form: tuple
    inf_net_mixture: float
    width: tuple
    diam: float
    dim: int
    convex: bool
    flags: tuple = field(default_factory=tuple)

    def rows(self):
        for i, r in enumerate(self.radii):
            yield (float(r), float(self.local_width[i]), float(self.local_width_se[i]),
                   float(self.logN_lower[i]), float(self.logN_upper[i]))

    def summary(self) -> dict:
        return {
            "r_star": list(map(float, self.r_star)),
            "r_tilde": list(map(float, self.r_tilde)),
            "inf_forms": {
                "width_plus_logN": list(map(float, self.inf_regret_form)),
                "logN_plus_r2": list(map(float, self.inf_red_form)),
                "logN_plus_half_r2_upper": float(self.inf_net_mixture),
            },
            "width": list(map(float, self.width)),
            "diameter": float(self.diam),
            "flags": list(self.flags),
        }


def _grid(diam: float, size: int) -> np.ndarray:
    return np.geomspace(diam / 1e4, diam, size)


def fixed_points(model: _Model, grid: np.ndarray) -> tuple[tuple, tuple]:
    """Brackets for (r*, r~)."""
    if model.diam == 0:
        return (0.0, 0.0), (0.0, 0.0)
    wg_lo, wg_hi = model.width_global()
    if model.convex and not model.exact_steps:
        top = min(math.sqrt(model.dim), math.sqrt(max(wg_hi, 0.0))) * (1 + 1e-9) + 1e-12
        rs_lo = _bisect(lambda r: model.local(np.array([r]))[0][0] >= r * r, 0.0, top)
        rs_hi = _bisect(lambda r: model.local(np.array([r]))[1][0] >= r * r, 0.0, top)
        rt_lo = _bisect(lambda r: model.logn(np.array([r]))[0][0] >= r * r, 0.0, model.diam)
        rt_hi = _bisect(lambda r: model.logn(np.array([r]))[1][0] >= r * r, 0.0, model.diam)
        return (rs_lo, rs_hi), (rt_lo, rt_hi)
    b = np.concatenate([[0.0], grid, [np.inf]])
    wlo, whi, _ = model.local(grid)
    glo, ghi = model.logn(grid)
    if model.exact_steps:
        # constant between breakpoints: value at the left end holds on the piece
        w_lo_p = np.concatenate([[0.0], wlo])
        w_hi_p = np.concatenate([[whi[0]], whi])
        g_lo_p = np.concatenate([[glo[0]], glo])
        g_hi_p = np.concatenate([[np.inf], ghi])
    else:
        w_lo_p = np.concatenate([[0.0], wlo])
        w_hi_p = np.concatenate([whi, [max(wg_hi, whi[-1])]])
        g_lo_p = np.concatenate([glo, [0.0]])
        g_hi_p = np.concatenate([[np.inf], ghi])
    return ((phi_step(b, w_lo_p), phi_step(b, w_hi_p)),
            (phi_step(b, g_lo_p), phi_step(b, g_hi_p)))


def inf_forms(model: _Model, grid: np.ndarray) -> dict:
    """Brackets for inf_r {w_A(r) + log N(A, r)} and inf_r {log N(A, r) + r^2},
    plus the net-mixture value inf_r {log N_upper(A, r) + r^2 / 2}."""
    if model.diam == 0:
        return {"regret": (0.0, 0.0), "red": (0.0, 0.0), "net_mixture": 0.0}
    wg_lo, wg_hi = model.width_global()
    wlo, whi, _ = model.local(grid)
    glo, ghi = model.logn(grid)
    r2 = grid ** 2
    # upper: any evaluated r; r >= diam gives w(A) (N = 1)
    reg_hi = min(float(np.min(whi + ghi)), wg_hi)
    red_hi = min(float(np.min(ghi + r2)), model.diam ** 2)
    net = min(float(np.min(ghi + r2 / 2)), model.diam ** 2 / 2)
    if model.exact_steps:
        # finite sets: N(A, 0+) = |A| and w_A(0+) = 0
        logk = float(model.logn(np.array([0.0]))[1][0])
        reg_hi = min(reg_hi, logk)
        red_hi = min(red_hi, logk)
        net = min(net, logk)
        reg_lo = min(float(np.min(wlo + glo)), logk, wg_lo)
        red_lo = min(float(np.min(glo + r2)), logk)
    else:
        # on [r_k, r_{k+1}): w >= w_lo(r_k), log N >= glo(r_{k+1})
        reg_lo = min(float(np.min(wlo[:-1] + glo[1:])), float(glo[0]), float(wlo[-1]))
        red_lo = min(float(np.min(glo[1:] + r2[:-1])), float(glo[0]), float(r2[-1]))
    return {"regret": (max(reg_lo, 0.0), reg_hi), "red": (max(red_lo, 0.0), red_hi),
            "net_mixture": net}


def complexity_profile(spec: S.SetSpec, cfg: MCConfig | None = None, center_budget: int = 64,
                       grid_size: int = 64) -> ComplexityProfile:
    """Local widths and covering bounds on a radius grid, with fixed points
    and infimum forms.

    The reported grid is 64 log-spaced radii on [diam/1e4, diam]; finite sets
    additionally evaluate at every breakpoint of their step functions so that
    fixed points and infima are exact up to Monte Carlo error.
    """
    cfg = cfg or MCConfig(samples=20_000)
    model = _model_for(spec, cfg, center_budget)
    diam = model.diam
    flags = []
    if model.lower_bound_only:
        flags.append("local_width_lower_bound")
    if diam == 0:
        z = np.zeros(1)
        return ComplexityProfile(z, z, z, z, z, z, z, (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
                                 (0.0, 0.0), 0.0, (0.0, 0.0), 0.0, spec.dim, True, tuple(flags))
    report = _grid(diam, grid_size)
    if model.exact_steps:
        bp = model.breakpoints()
        work = np.unique(np.concatenate([report, bp, [diam]]))
    else:
        work = np.unique(np.concatenate([np.geomspace(diam * 1e-6, diam, 400), report]))
    rs, rt = fixed_points(model, work)
    if not model.exact_steps:
        extra = [x for x in (*rs, *rt) if x > 0]
        work = np.unique(np.concatenate([work, extra]))
    forms = inf_forms(model, work)
    wlo, whi, se = model.local(report)
    glo, ghi = model.logn(report)
    # the true curves are monotone, so bounds propagate along the grid
    wlo = np.maximum.accumulate(wlo)
    whi = np.minimum.accumulate(whi[::-1])[::-1]
    glo = np.maximum.accumulate(glo[::-1])[::-1]
    ghi = np.minimum.accumulate(ghi)
    if hasattr(_base(model), "point_local"):
        inner, t, _ = _peel(spec)
        val = np.array([t * _base(model).point_local(r / t)[0] for r in report])
        val = np.clip(val, wlo, whi)
    else:
        val = 0.5 * (wlo + whi)
    width = model.width_global()
    return ComplexityProfile(report, val, se, wlo, whi, glo, ghi, rs, rt, forms["regret"],
                             forms["red"], forms["net_mixture"], width, diam, spec.dim,
                             model.convex, tuple(flags))


def entropy_numbers(profile: ComplexityProfile, k_max: int = 10) -> list[tuple[int, float, float]]:
    """Brackets for e_k = inf{r : N(A, r) <= 2^k} read off the profile grid."""
    out = []
    r = profile.radii
    for k in range(k_max + 1):
        thr = k * math.log(2.0) + 1e-12
        ok_hi = np.flatnonzero(profile.logN_upper <= thr)
        ok_lo = np.flatnonzero(profile.logN_lower <= thr)
        hi = float(r[ok_hi[0]]) if ok_hi.size else float("inf")
        # below the first grid radius where the lower bound allows 2^k balls,
        # the count certainly exceeds 2^k
        lo = float(r[ok_lo[0] - 1]) if ok_lo.size and ok_lo[0] > 0 else 0.0
        out.append((k, lo, hi))
    return out
