"""Predictive densities, sequential log-loss and redundancy.

Losses are in nats throughout and every density is handled through its
logarithm.  The model is y ~ N(theta, I_n) with theta in a set A; the
normalized maximum likelihood (NML) density over A is

    log q(y) = -n/2 log 2 pi - dist^2(y, A)/2 - R*(A),

Gaussian predictors factor through the Cholesky factor of their covariance,
and net mixtures update their weights by Bayes' rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.special import logsumexp, ndtr

from . import sets as S
from ._numerics import LOG_2PI, batch_means_se, batch_sizes, golden_section, rng_for
from .estimate import MCConfig, RegretEstimate

__all__ = [
    "GaussianDensity", "NML", "Gaussian", "NetMixture", "LossRecord", "NotSequential",
    "log_density", "sequential_predict", "regret_on_sequence", "comparator_loss",
    "ridge_predictor", "ridge_identity", "ridge_bound", "choose_lambda", "kl", "kl_point",
    "tilde_q", "tilde_q_redundancy", "best_tilde_q_redundancy", "two_point_redundancy",
    "two_point_tv", "mutual_information_mc", "blahut_arimoto_1d", "finite_capacity_mc", "RedundancyBounds",
    "redundancy_bounds",
]

_NS_MI = 201
_NS_CAP = 202


class NotSequential(TypeError):
    """The predictor has no closed-form sequential conditionals."""


# ------------------------------------------------------------- densities

@dataclass(frozen=True, eq=False)
class GaussianDensity:
    """N(mean, cov); ``cov`` is a vector (diagonal) or an SPD matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        n = mean.size
        if cov.ndim == 0:
            cov = np.full(n, float(cov))
        if cov.ndim == 1:
            if cov.size != n:
                raise S.DimensionMismatch(f"covariance has {cov.size} entries, mean has {n}")
            if not np.all(cov > 0) or not np.all(np.isfinite(cov)):
                raise ValueError("diagonal covariance must be positive")
            L = np.diag(np.sqrt(cov))
        elif cov.ndim == 2:
            if cov.shape != (n, n):
                raise S.DimensionMismatch(f"covariance shape {cov.shape}, mean has {n}")
            if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-12):
                raise ValueError("covariance must be symmetric")
            try:
                L = cholesky(cov, lower=True)
            except np.linalg.LinAlgError as e:
                raise ValueError("covariance is not positive definite") from e
        else:
            raise ValueError("covariance must be a vector or a matrix")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", L)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def diagonal(self) -> bool:
        return self.cov.ndim == 1

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def matrix(self) -> np.ndarray:
        return np.diag(self.cov) if self.diagonal else self.cov

    def precision(self) -> np.ndarray:
        if self.diagonal:
            return np.diag(1.0 / self.cov)
        return cho_solve((self._chol, True), np.eye(self.dim))

    def whiten(self, Y: np.ndarray) -> np.ndarray:
        """z = L^{-1}(y - mean) for the rows of Y."""
        R = np.atleast_2d(Y) - self.mean
        if self.diagonal:
            return R / np.sqrt(self.cov)
        return solve_triangular(self._chol, R.T, lower=True).T

    def logpdf(self, Y) -> np.ndarray:
        Z = self.whiten(Y)
        return -0.5 * (self.dim * LOG_2PI + self.logdet()) - 0.5 * np.sum(Z * Z, axis=1)


# ------------------------------------------------------------ predictors

@dataclass(frozen=True, eq=False)
class NML:
    support: S.SetSpec
    normalizer: RegretEstimate

    @classmethod
    def over(cls, support: S.SetSpec, **kw) -> "NML":
        from .regret import regret
        return cls(support, regret(support, **kw))


@dataclass(frozen=True, eq=False)
class Gaussian:
    density: GaussianDensity


@dataclass(frozen=True, eq=False)
class NetMixture:
    centers: S.FinitePoints
    weights: np.ndarray = None

    def __post_init__(self):
        k = self.centers.size
        w = np.full(k, 1.0 / k) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (k,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector over the centres")
        object.__setattr__(self, "weights", w / w.sum())


def _dim(pred) -> int:
    if isinstance(pred, NML):
        return pred.support.dim
    if isinstance(pred, Gaussian):
        return pred.density.dim
    if isinstance(pred, NetMixture):
        return pred.centers.dim
    raise TypeError(f"unknown predictor {type(pred).__name__}")


def _check_y(pred, y) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.ndim != 1 or y.size != _dim(pred):
        raise S.DimensionMismatch(f"sequence has length {y.size}, predictor dimension {_dim(pred)}")
    return y


def log_density(pred, y) -> float:
    """log q(y) for a single sequence y."""
    y = _check_y(pred, y)
    n = y.size
    if isinstance(pred, NML):
        d2 = float(S.dist2(pred.support, y[None, :])[0])
        return -0.5 * n * LOG_2PI - 0.5 * d2 - pred.normalizer.value
    if isinstance(pred, Gaussian):
        return float(pred.density.logpdf(y[None, :])[0])
    P = pred.centers.points
    comp = -0.5 * n * LOG_2PI - 0.5 * np.sum((P - y) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        return float(logsumexp(comp + np.log(pred.weights)))


@dataclass(frozen=True)
class LossRecord:
    per_step_loss: np.ndarray
    cumulative: float
    comparator_loss: float = float("nan")
    regret: float = float("nan")
    posterior: np.ndarray | None = None
    flags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if abs(float(np.sum(self.per_step_loss)) - self.cumulative) > 1e-9 * max(1.0, abs(self.cumulative)):
            raise ValueError("cumulative loss must equal the sum of per-step losses")

    def with_comparator(self, loss: float) -> "LossRecord":
        return LossRecord(self.per_step_loss, self.cumulative, loss, self.cumulative - loss,
                          self.posterior, self.flags)


def sequential_predict(pred, y) -> LossRecord:
    """Per-step conditional log-losses -log q(y_i | y_<i)."""
    y = _check_y(pred, y)
    if isinstance(pred, NML):
        raise NotSequential("the NML density is evaluated jointly only")
    if isinstance(pred, Gaussian):
        g = pred.density
        L = g.chol
        z = g.whiten(y[None, :])[0]
        # y_i | y_<i ~ N(mean_i + sum_{j<i} L_ij z_j, L_ii^2)
        d = np.diag(L)
        losses = 0.5 * LOG_2PI + np.log(d) + 0.5 * z * z
        return LossRecord(losses, float(losses.sum()))
    P = pred.centers.points
    with np.errstate(divide="ignore"):
        logw = np.log(pred.weights)
    losses = np.empty(y.size)
    for i in range(y.size):
        step = -0.5 * LOG_2PI - 0.5 * (y[i] - P[:, i]) ** 2
        joint = logw + step
        lp = logsumexp(joint)
        losses[i] = -lp
        logw = joint - lp
    return LossRecord(losses, float(losses.sum()), posterior=np.exp(logw))


def comparator_loss(comparator: S.SetSpec, y) -> float:
    """inf_{theta in A} -log p_theta(y) = n/2 log 2 pi + dist^2(y, A)/2."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size != comparator.dim:
        raise S.DimensionMismatch("sequence and comparator differ in dimension")
    return 0.5 * y.size * LOG_2PI + 0.5 * float(S.dist2(comparator, y[None, :])[0])


def regret_on_sequence(pred, comparator: S.SetSpec, y) -> LossRecord:
    y = _check_y(pred, y)
    try:
        rec = sequential_predict(pred, y)
    except NotSequential:
        ld = log_density(pred, y)
        rec = LossRecord(np.array([-ld]), -ld, flags=("joint_only",))
    return rec.with_comparator(comparator_loss(comparator, y))


# ----------------------------------------------------------------- ridge

def ridge_predictor(a, lam: float) -> Gaussian:
    """q_lambda = N(0, diag(1 + a_i^2 / lambda))."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a = np.asarray(a, dtype=float)
    return Gaussian(GaussianDensity(np.zeros(a.size), 1.0 + a * a / lam))


def ridge_identity(a, lam: float, y) -> tuple[float, float]:
    """(lhs, rhs) of

        l(q_lambda, y) - inf_theta {l(p_theta, y) + lambda/2 sum theta_i^2/a_i^2}
            = 1/2 sum log(1 + a_i^2 / lambda).

    The penalized infimum is attained at theta_i = y_i / (1 + lambda / a_i^2).
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    q = ridge_predictor(a, lam)
    loss_q = -log_density(q, y)
    theta = y / (1.0 + lam / (a * a))
    pen = 0.5 * y.size * LOG_2PI + 0.5 * np.sum((y - theta) ** 2) + 0.5 * lam * np.sum(theta ** 2 / a ** 2)
    return loss_q - float(pen), 0.5 * float(np.sum(np.log1p(a * a / lam)))


def ridge_bound(a, lam: float) -> float:
    """sup over E_a of the regret of q_lambda is at most this."""
    a = np.asarray(a, dtype=float)
    return 0.5 * float(np.sum(np.log1p(a * a / lam))) + 0.5 * lam


def choose_lambda(a, rtol: float = 1e-6) -> tuple[float, float]:
    """Minimize the ridge bound over log lambda in [1e-8, sum a^2 + 1].

    Returns (lambda, bound).  The objective is unimodal in log lambda: its
    derivative in lambda, 1/2 - 1/2 sum a_i^2 / (lambda (lambda + a_i^2)),
    is increasing.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("axes must be positive")
    lo, hi = math.log(1e-8), math.log(float(np.sum(a * a)) + 1.0)

    def f(u):
        return np.array([ridge_bound(a, math.exp(x)) for x in np.atleast_1d(u)])

    u, _ = golden_section(f, np.array([lo]), np.array([hi]), tol=rtol)
    lam = float(math.exp(u[0]))
    # the grid refinement: compare against the endpoints
    cands = [(ridge_bound(a, x), x) for x in (lam, math.exp(lo), math.exp(hi))]
    bound, lam = min(cands)
    return lam, bound


# -------------------------------------------------------------------- KL

def kl_point(theta, q: GaussianDensity) -> float:
    """KL(p_theta || q) for p_theta = N(theta, I)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size != q.dim:
        raise S.DimensionMismatch("theta and q differ in dimension")
    n = q.dim
    if q.diagonal:
        tr = float(np.sum(1.0 / q.cov))
    else:
        Linv = solve_triangular(q.chol, np.eye(n), lower=True)
        tr = float(np.sum(Linv * Linv))
    z = q.whiten(theta[None, :])[0]
    return 0.5 * (q.logdet() - n + tr) + 0.5 * float(z @ z)


def kl(p, q: GaussianDensity) -> float:
    """KL(p || q) where p is N(theta, I) given by theta or a unit-covariance density."""
    if isinstance(p, GaussianDensity):
        if not np.allclose(p.matrix(), np.eye(p.dim)):
            raise ValueError("p must have identity covariance")
        p = p.mean
    return kl_point(p, q)


def tilde_q(a, lam: float) -> GaussianDensity:
    """N(0, diag(1 + (a_i^2/lambda) 1[a_i >= 2 sqrt(lambda)]))."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a = np.asarray(a, dtype=float)
    keep = a >= 2.0 * math.sqrt(lam)
    return GaussianDensity(np.zeros(a.size), 1.0 + np.where(keep, a * a / lam, 0.0))


def tilde_q_redundancy(a, lam: float) -> float:
    """sup_{theta in E_a} KL(p_theta || tilde q_lambda), exactly.

    KL = c + 1/2 sum theta_i^2 / s_i is linear in theta_i^2, so its sup over
    the ellipsoid sits at a vertex: 1/2 max_i a_i^2 / s_i.
    """
    a = np.asarray(a, dtype=float)
    q = tilde_q(a, lam)
    s = q.cov
    const = 0.5 * float(np.sum(np.log(s) - 1.0 + 1.0 / s))
    return const + 0.5 * float(np.max(a * a / s))


def best_tilde_q_redundancy(a, grid: int = 400) -> tuple[float, float]:
    """min over lambda of tilde_q_redundancy; returns (lambda, value)."""
    a = np.asarray(a, dtype=float)
    lams = np.geomspace(1e-8, float(np.max(a)) ** 2 + 1.0, grid)
    vals = np.array([tilde_q_redundancy(a, x) for x in lams])
    i = int(np.argmin(vals))
    return float(lams[i]), float(vals[i])


# ----------------------------------------------------------- redundancy

def two_point_tv(rho: float) -> float:
    """Total variation |p_0 - p_rho|_TV = 2 Phi(rho/2) - 1."""
    return float(2.0 * ndtr(0.5 * rho) - 1.0)


def two_point_redundancy(rho: float) -> RegretEstimate:
    """Red({0, rho}) = KL(p_0 || (p_0 + p_rho)/2) by 1-d quadrature.

    The uniform prior equalizes the two divergences, so it is capacity
    achieving and the value is exact up to quadrature error.
    """
    rho = abs(float(rho))
    if rho == 0:
        return RegretEstimate(0.0, "exact")

    def f(x):
        return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) * (
            math.log(2.0) - np.logaddexp(0.0, rho * x - 0.5 * rho * rho))

    val, err = integrate.quad(f, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return RegretEstimate(float(val), "quadrature", float(max(err, 1e-12)))


def _finite_view(spec: S.SetSpec) -> np.ndarray | None:
    """The point array of a finite spec (through scales and translates)."""
    if isinstance(spec, S.Point):
        return spec.v[None, :]
    if isinstance(spec, S.FinitePoints):
        return spec.points
    if isinstance(spec, S.Scale):
        P = _finite_view(spec.inner)
        return None if P is None else spec.factor * P
    if isinstance(spec, S.Translate):
        P = _finite_view(spec.inner)
        return None if P is None else P + spec.by
    return None


def mutual_information_mc(P: np.ndarray, cfg: MCConfig | None = None,
                          weights: np.ndarray | None = None) -> tuple[float, float]:
    """I(theta; Y) for theta uniform (or ``weights``) on the rows of P.

    Equals sum_i w_i KL(p_i || sum_k w_k p_k) and bounds Red(A) from below for
    any A containing the points.  Returns (estimate, batch-means SE).
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    k, n = P.shape
    if k == 1:
        return 0.0, 0.0
    cfg = cfg or MCConfig(samples=64_000)
    w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
    logw = np.log(w)
    sizes = batch_sizes(max(cfg.samples // k, cfg.batches * 2), cfg.batches)
    means = []
    for b, m in enumerate(sizes):
        Z = rng_for(cfg.seed, _NS_MI, b).standard_normal((k, m, n))
        # log p_k(Y) - log p_i(Y) = <Y - theta_i, theta_k - theta_i> - |theta_k - theta_i|^2/2
        total = 0.0
        for i in range(k):
            D = P - P[i]
            rel = Z[i] @ D.T - 0.5 * np.sum(D * D, axis=1)
            total += w[i] * float(np.mean(-logsumexp(rel + logw, axis=1)))
        means.append(total)
    return batch_means_se(np.array(means), np.array(sizes))


def _divergences_mc(P, logw, m, seed, ns, batches):
    """Per-point KL(p_i || sum_k w_k p_k): batch means (B, k) and sizes."""
    k, n = P.shape
    sizes = batch_sizes(max(m, batches * 2), batches)
    out = np.empty((len(sizes), k))
    for b, mb in enumerate(sizes):
        Z = rng_for(seed, ns, b).standard_normal((k, mb, n))
        for i in range(k):
            D = P - P[i]
            rel = Z[i] @ D.T - 0.5 * np.sum(D * D, axis=1)
            out[b, i] = float(np.mean(-logsumexp(rel + logw, axis=1)))
    return out, np.asarray(sizes, dtype=float)


def finite_capacity_mc(P: np.ndarray, cfg: MCConfig | None = None,
                       iters: int = 400, tol: float = 1e-4) -> tuple[float, float, np.ndarray]:
    """Capacity bracket for the Gaussian location channel restricted to the rows of P.

    Blahut-Arimoto runs on a fixed sample (sample-average approximation); the
    resulting prior w is then re-evaluated on fresh draws.  Returns
    (lower, upper, w) with lower = I(w) - 3 SE and
    upper = max_i KL(p_i || q_w) + 3 SE_i, both valid up to Monte Carlo error
    since I(w) <= Red(P) <= sup_i KL(p_i || q_w) for every prior w.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    k, n = P.shape
    if k == 1:
        return 0.0, 0.0, np.ones(1)
    cfg = cfg or MCConfig(samples=64_000)
    m = max(cfg.samples // k, 200)
    # fixed design for the iterations: rel[i, s, j] = log p_j(Y) - log p_i(Y), Y ~ p_i
    Z = rng_for(cfg.seed, _NS_CAP, 0).standard_normal((k, min(m, 2000), n))
    rel = np.empty((k, Z.shape[1], k))
    for i in range(k):
        D = P - P[i]
        rel[i] = Z[i] @ D.T - 0.5 * np.sum(D * D, axis=1)
    top = rel.max(axis=2)
    E = np.exp(rel - top[:, :, None]).reshape(-1, k)
    base = top.mean(axis=1)
    logw = np.full(k, -math.log(k))
    for _ in range(iters):
        w = np.exp(logw)
        d = -np.log(E @ w).reshape(k, -1).mean(axis=1) - base
        if d.max() - float(w @ d) < tol:
            break
        logw = logw + d
        logw -= logsumexp(logw)
    bm, sz = _divergences_mc(P, logw, m, cfg.seed, _NS_CAP + 1, cfg.batches)
    d = (bm * sz[:, None]).sum(axis=0) / sz.sum()
    se = bm.std(axis=0, ddof=1) / math.sqrt(bm.shape[0])
    w = np.exp(logw)
    mi_b = bm @ w
    mi, mi_se = float(mi_b @ sz / sz.sum()), float(mi_b.std(ddof=1) / math.sqrt(mi_b.size))
    return mi - 3.0 * mi_se, float(np.max(d + 3.0 * se)), w


def blahut_arimoto_1d(thetas, h: float = 0.1, tol: float = 1e-5, max_iter: int = 20_000,
                      fine: int = 8) -> tuple[float, float, np.ndarray]:
    """Capacity bracket for the Gaussian location channel on a 1-d parameter grid.

    Returns (lower, upper, prior): lower = I(prior) and upper = max over a
    grid ``fine`` times denser (between min and max of ``thetas``) of
    KL(p_theta || q_prior).  The y-integrals use the trapezoidal rule with
    step ``h``, which is spectrally accurate for these smooth, fast-decaying
    integrands.
    """
    t = np.unique(np.asarray(thetas, dtype=float))
    y = np.arange(t[0] - 12.0, t[-1] + 12.0 + h, h)

    def kernel(th):
        logphi = -0.5 * LOG_2PI - 0.5 * (y[None, :] - th[:, None]) ** 2
        W = np.exp(logphi) * h
        return W, np.sum(W * logphi, axis=1)

    W, neg_ent = kernel(t)
    p = np.full(t.size, 1.0 / t.size)
    for _ in range(max_iter):
        logq = np.log(np.maximum(p @ W / h, 1e-300))
        D = neg_ent - W @ logq
        lower = float(p @ D)
        if D.max() - lower < tol:
            break
        p = p * np.exp(D - D.max())
        p /= p.sum()
    logq = np.log(np.maximum(p @ W / h, 1e-300))
    D = neg_ent - W @ logq
    lower = float(p @ D)
    tf = np.linspace(t[0], t[-1], max(fine * t.size, 2)) if t.size > 1 else t
    Wf, nef = kernel(tf)
    upper = float(np.max(nef - Wf @ logq))
    return lower, max(upper, lower), p


@dataclass(frozen=True)
class RedundancyBounds:
    lower: float
    upper: float
    lower_route: str
    upper_route: str
    near_exact: RegretEstimate | None = None
    flags: tuple = field(default_factory=tuple)
    routes: tuple = field(default_factory=tuple)   # (side, route, value) for every bound tried

    def route(self, side: str, name: str) -> float:
        for sd, nm, v in self.routes:
            if sd == side and nm == name:
                return v
        raise KeyError(f"no {side} bound from route {name!r}")

    def to_dict(self, bits: bool = False) -> dict:
        c = 1.0 / math.log(2.0) if bits else 1.0
        d = {"lower": self.lower * c, "upper": self.upper * c, "lower_route": self.lower_route,
             "upper_route": self.upper_route, "units": "bits" if bits else "nats"}
        if self.near_exact is not None:
            d["near_exact"] = self.near_exact.to_dict(bits)
        if self.flags:
            d["flags"] = list(self.flags)
        d["routes"] = [{"side": sd, "route": nm, "value": v * c} for sd, nm, v in self.routes]
        return d


def _interval_1d(spec: S.SetSpec) -> tuple[float, float] | None:
    if spec.dim != 1 or not spec.is_convex:
        return None
    lo, hi = spec.bbox()
    return float(lo[0]), float(hi[0])


def _probe_points(spec: S.SetSpec, scale: float) -> np.ndarray | None:
    """Centre and axis-extreme points of a convex body shrunk toward its centre."""
    c = spec.symmetry_center
    if c is None or not spec.is_convex:
        return None
    n = spec.dim
    far = 1e6 * (1.0 + float(np.max(np.abs(spec.bbox()[1] - spec.bbox()[0]))))
    E = np.vstack([np.eye(n), -np.eye(n)]) * far + c
    V = S.project(spec, E)
    pts = np.vstack([c[None, :], c + scale * (V - c)])
    return np.unique(np.round(pts, 14), axis=0)


def redundancy_bounds(spec: S.SetSpec, cfg: MCConfig | None = None, profile=None) -> RedundancyBounds:
    """Two-sided bounds on the minimax redundancy Red(A) = inf_q sup_A KL(p_theta || q).

    Upper: net mixtures, min over r of log N_cover(A, r) + r^2/2 (and, for
    ellipsoids, the exact sup divergence of tilde q_lambda minimized over
    lambda).  Lower: mutual information under a uniform prior on a finite
    subset, the separated-packing bound log N - 3, and Pinsker for two
    points.  One-dimensional and two-point sets also get a near-exact value.
    """
    from .complexity import complexity_profile

    cfg = cfg or MCConfig(samples=64_000)
    P = _finite_view(spec)
    lowers: list[tuple[float, str]] = [(0.0, "trivial")]
    uppers: list[tuple[float, str]] = []
    near = None
    flags = []

    if P is not None and P.shape[0] == 1:
        return RedundancyBounds(0.0, 0.0, "exact", "exact", RegretEstimate(0.0, "exact"),
                                routes=(("lower", "exact", 0.0), ("upper", "exact", 0.0)))

    if P is not None and P.shape[0] == 2:
        rho = float(np.linalg.norm(P[1] - P[0]))
        near = two_point_redundancy(rho)
        lowers.append((near.lo, "two_point_quadrature"))
        lowers.append((0.5 * two_point_tv(rho) ** 2, "pinsker"))
        uppers.append((near.hi, "two_point_quadrature"))
        uppers.append((min(math.log(2.0), 0.5 * rho * rho), "net_mixture"))
    else:
        if profile is None:
            profile = complexity_profile(spec, MCConfig(samples=4000, seed=cfg.seed))
        r = profile.radii
        net = float(np.min(profile.logN_upper + 0.5 * r * r))
        uppers.append((min(net, profile.inf_net_mixture), "net_mixture"))
        # separated packings: log N - 3 when r^2 >= 32 log N
        lg = profile.logN_lower
        ok = r * r >= 32.0 * lg
        if np.any(ok & (lg > 3)):
            lowers.append((float(np.max(np.where(ok, lg - 3.0, 0.0))), "separated_packing"))
        if P is not None:
            uppers.append((math.log(P.shape[0]), "uniform_mixture"))
            if P.shape[0] <= 64 and P.shape[1] > 1:
                cap_lo, cap_hi, _ = finite_capacity_mc(P, cfg)
                lowers.append((cap_lo, "capacity_mc"))
                uppers.append((cap_hi, "capacity_mc"))
            elif P.shape[0] <= 256:
                mi, se = mutual_information_mc(P, cfg)
                lowers.append((mi - 3.0 * se, "mutual_information"))
            else:
                flags.append("mutual_information_skipped")
        else:
            best = (0.0, "trivial")
            for s in (1.0, 0.5, 0.25, 0.125):
                Q = _probe_points(spec, s)
                if Q is None:
                    break
                mi, se = mutual_information_mc(Q, cfg)
                best = max(best, (mi - 3.0 * se, "mutual_information"))
            lowers.append(best)
        if isinstance(spec, S.Ellipsoid) and np.allclose(spec.symmetry_center, 0):
            _, v = best_tilde_q_redundancy(spec.axes)
            uppers.append((v, "tilde_q"))
        iv = _interval_1d(spec) if P is None else None
        if iv is not None or (P is not None and P.shape[1] == 1):
            thetas = (np.linspace(iv[0], iv[1], int(min(500, max(2, (iv[1] - iv[0]) / 0.1 + 1))))
                      if iv is not None else P[:, 0])
            lo_ba, hi_ba, _ = blahut_arimoto_1d(thetas, fine=8 if iv is not None else 1)
            near = RegretEstimate(0.5 * (lo_ba + hi_ba), "quadrature", 0.5 * (hi_ba - lo_ba) + 1e-9)
            lowers.append((lo_ba - 1e-9, "blahut_arimoto"))
            if P is not None:
                uppers.append((hi_ba + 1e-9, "blahut_arimoto"))
            else:
                flags.append("blahut_arimoto_upper_on_grid")

    lo, lr = max(lowers)
    hi, ur = min(uppers)
    routes = tuple([("lower", r, float(v)) for v, r in lowers] + [("upper", r, float(v)) for v, r in uppers])
    return RedundancyBounds(max(lo, 0.0), hi, lr, ur, near, tuple(flags), routes)
