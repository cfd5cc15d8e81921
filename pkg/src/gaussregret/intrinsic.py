"""Intrinsic volumes: closed forms, Monte Carlo estimators and Steiner sums.

Sequences are stored as V_0..V_n in the ambient dimension n; bodies of lower
affine dimension simply have trailing zeros.  The regret of a convex body is
the log of its Wills functional at scale 1/sqrt(2 pi),

    R*(tK) = log sum_j V_j(K) (t / sqrt(2 pi))^j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull as _QHull
from scipy.spatial import QhullError
from scipy.special import comb, gammaln

from . import sets as S
from ._numerics import LOG_2PI, SQRT_2PI, batch_means_se, batch_sizes, rng_for
from .estimate import RegretEstimate

__all__ = [
    "kappa", "kappa_table", "IntrinsicVolumeSeq", "VolumeEstimate",
    "ball_volumes", "box_volumes", "segment_volumes", "exact_volumes",
    "mc_tsirelson", "mc_kubota", "mc_volumes", "steiner_parallel_volume",
    "regret_from_volumes", "MaxTermBounds", "max_intrinsic_bounds", "rissanen_report",
    "log_concavity_slack",
]


def kappa_table(n: int) -> np.ndarray:
    """Unit-ball volumes kappa_0..kappa_n by kappa_j = kappa_{j-2} 2 pi / j."""
    k = np.empty(n + 1)
    k[0] = 1.0
    if n >= 1:
        k[1] = 2.0
    for j in range(2, n + 1):
        k[j] = k[j - 2] * 2.0 * math.pi / j
    return k


def kappa(j: int) -> float:
    return float(kappa_table(j)[j])


def log_concavity_slack(values) -> np.ndarray:
    """Relative slack of (j+1) V_{j+1} V_{j-1} <= j V_j^2 for j = 1..n-1.

    Entry j-1 is (j V_j^2 - (j+1) V_{j+1} V_{j-1}) / max(j V_j^2, tiny); the
    inequality holds when every entry is >= 0.
    """
    v = np.asarray(values, dtype=float)
    j = np.arange(1, v.size - 1)
    lhs = (j + 1) * v[2:] * v[:-2]
    rhs = j * v[1:-1] ** 2
    return (rhs - lhs) / np.maximum(rhs, np.finfo(float).tiny)


@dataclass(frozen=True)
class IntrinsicVolumeSeq:
    values: np.ndarray
    provenance: str = "exact"
    std_errors: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("need V_0..V_n with n >= 1")
        if v[0] != 1.0:
            raise ValueError(f"V_0 must be 1, got {v[0]}")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("intrinsic volumes must be finite and non-negative")
        if self.provenance not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "values", v)
        if self.std_errors is not None:
            se = np.asarray(self.std_errors, dtype=float)
            if se.shape != v.shape:
                raise ValueError("std_errors must match values")
            object.__setattr__(self, "std_errors", se)
        if self.provenance == "exact":
            bad = log_concavity_slack(v) < -1e-9
            if np.any(bad):
                raise ValueError(f"sequence violates log-concavity at j={np.flatnonzero(bad) + 1}")

    @property
    def dim(self) -> int:
        return self.values.size - 1

    def scaled(self, t: float) -> "IntrinsicVolumeSeq":
        """Sequence of tK (V_j is homogeneous of degree j)."""
        p = t ** np.arange(self.values.size)
        se = None if self.std_errors is None else self.std_errors * p
        return IntrinsicVolumeSeq(self.values * p, self.provenance, se)

    def gaussian_normalized(self, t: float = 1.0) -> np.ndarray:
        """V_j(tK / sqrt(2 pi))."""
        return self.values * (t / SQRT_2PI) ** np.arange(self.values.size)

    def padded(self, n: int) -> "IntrinsicVolumeSeq":
        if n < self.dim:
            raise ValueError("cannot shrink the ambient dimension")
        pad = n - self.dim
        se = None if self.std_errors is None else np.concatenate([self.std_errors, np.zeros(pad)])
        return IntrinsicVolumeSeq(np.concatenate([self.values, np.zeros(pad)]), self.provenance, se)

    def __mul__(self, other: "IntrinsicVolumeSeq") -> "IntrinsicVolumeSeq":
        """Volumes of the Cartesian product: Cauchy product of the sequences."""
        v = np.convolve(self.values, other.values)
        prov = "exact" if self.provenance == other.provenance == "exact" else "monte_carlo"
        se = None
        if prov == "monte_carlo":
            sa = self.std_errors if self.std_errors is not None else np.zeros_like(self.values)
            sb = other.std_errors if other.std_errors is not None else np.zeros_like(other.values)
            # first-order propagation, parts independent
            se = np.sqrt(np.convolve(sa ** 2, other.values ** 2) + np.convolve(self.values ** 2, sb ** 2))
        return IntrinsicVolumeSeq(v, prov, se)

    def to_rows(self) -> list[tuple[int, float, float]]:
        se = self.std_errors if self.std_errors is not None else np.zeros_like(self.values)
        return [(j, float(v), float(s)) for j, (v, s) in enumerate(zip(self.values, se))]


def ball_volumes(n: int, r: float = 1.0) -> IntrinsicVolumeSeq:
    """V_j(r B_2^n) = C(n, j) kappa_n / kappa_{n-j} r^j."""
    if n < 1:
        raise ValueError("n must be >= 1")
    j = np.arange(n + 1)
    # log space: the binomial and kappa_n / kappa_{n-j} overflow separately for large n
    log_kappa = 0.5 * j * math.log(math.pi) - gammaln(0.5 * j + 1.0)
    logv = (gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0)
            + log_kappa[n] - log_kappa[n - j] + j * math.log(float(r)))
    v = np.exp(logv)
    v[0] = 1.0
    return IntrinsicVolumeSeq(v)


def box_volumes(sides) -> IntrinsicVolumeSeq:
    """Elementary symmetric polynomials e_j(sides) from prod(1 + a_i t)."""
    a = np.asarray(sides, dtype=float).ravel()
    if a.size < 1 or np.any(a <= 0):
        raise ValueError("box sides must be positive")
    e = np.zeros(a.size + 1)
    e[0] = 1.0
    for i, s in enumerate(a, 1):
        e[1:i + 1] = e[1:i + 1] + s * e[0:i]
    return IntrinsicVolumeSeq(e)


def segment_volumes(length: float, n: int = 1) -> IntrinsicVolumeSeq:
    v = np.zeros(n + 1)
    v[0] = 1.0
    v[1] = float(length)
    return IntrinsicVolumeSeq(v)


def exact_volumes(spec: S.SetSpec) -> IntrinsicVolumeSeq:
    """Closed-form volumes for Point/Segment/Ball/Box (and round ellipsoids),
    closed under Scale, Translate and Product."""
    n = spec.dim
    if isinstance(spec, S.Point):
        return IntrinsicVolumeSeq(np.r_[1.0, np.zeros(n)])
    if isinstance(spec, S.FinitePoints) and spec.size == 1:
        return IntrinsicVolumeSeq(np.r_[1.0, np.zeros(n)])
    if isinstance(spec, S.Segment):
        if spec.length == 0:
            return IntrinsicVolumeSeq(np.r_[1.0, np.zeros(n)])
        return segment_volumes(spec.length, n)
    if isinstance(spec, S.Ball):
        return ball_volumes(n, spec.radius)
    if isinstance(spec, S.Ellipsoid) and np.ptp(spec.axes) == 0:
        return ball_volumes(n, float(spec.axes[0]))
    if isinstance(spec, S.Box):
        return box_volumes(spec.sides)
    if isinstance(spec, S.Scale):
        return exact_volumes(spec.inner).scaled(spec.factor)
    if isinstance(spec, S.Translate):
        return exact_volumes(spec.inner)
    if isinstance(spec, S.Product):
        seq = exact_volumes(spec.parts[0])
        for p in spec.parts[1:]:
            seq = seq * exact_volumes(p)
        return seq
    if isinstance(spec, (S.Union, S.MinkowskiSum)) and len(spec.parts) == 1:
        return exact_volumes(spec.parts[0])
    raise S.UnsupportedComposition(f"no closed-form intrinsic volumes for {spec.kind}")


# ------------------------------------------------------------ Monte Carlo

@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    se: float
    samples: int
    seed: int


def _unwrap(spec: S.SetSpec) -> tuple[S.SetSpec, float]:
    """Strip Scale/Translate; return (core, accumulated scale)."""
    t = 1.0
    while isinstance(spec, (S.Scale, S.Translate)):
        if isinstance(spec, S.Scale):
            t *= spec.factor
        spec = spec.inner
    return spec, t


def _vertex_cloud(core: S.SetSpec) -> np.ndarray | None:
    if isinstance(core, S.ConvexHull):
        return core.points
    if isinstance(core, S.Segment):
        return core.endpoints
    if isinstance(core, S.Point):
        return core.v[None, :]
    if isinstance(core, S.Box):
        if core.dim > 14:
            return None
        corners = np.array(np.meshgrid(*[[0.0, 1.0]] * core.dim, indexing="ij")).reshape(core.dim, -1).T
        return core.corner + corners * core.sides
    return None


def _hull_volume(Q: np.ndarray) -> float:
    """Exact volume of conv(rows of Q) in dimension Q.shape[1] <= 3; 0 if flat."""
    j = Q.shape[1]
    if j == 1:
        return float(Q.max() - Q.min())
    if Q.shape[0] <= j:
        return 0.0
    try:
        return float(_QHull(Q).volume)
    except (QhullError, ValueError):
        return 0.0


def _tsirelson_sample(core, j, G, rotation):
    """vol_j(G K) / kappa_j for one Gaussian j x n matrix G."""
    if isinstance(core, (S.Ellipsoid, S.Ball)):
        a = core.axes if isinstance(core, S.Ellipsoid) else np.full(core.dim, core.radius)
        M = G @ rotation if rotation is not None else G
        M = M * a
        sign, logdet = np.linalg.slogdet(M @ M.T)
        return math.exp(0.5 * logdet) if sign > 0 else 0.0
    P = _vertex_cloud(core)
    if rotation is not None:
        P = P @ rotation.T
    return _hull_volume(P @ G.T) / kappa(j)


def mc_tsirelson(spec: S.SetSpec, j: int, samples: int = 20_000, seed: int = 0,
                 batches: int = 16, rotation: np.ndarray | None = None) -> VolumeEstimate:
    """Estimate V_j(K / sqrt(2 pi)) = E[vol_j(G K) / kappa_j] / j!.

    Ellipsoids (and balls) use sqrt(det(G diag(a^2) G^T)); polytopes given by
    vertices (ConvexHull, Box, Segment) use exact hull volumes of the
    projected vertices and are limited to j <= 3.  ``rotation`` applies an
    orthogonal map to the body first.
    """
    core, t = _unwrap(spec)
    n = spec.dim
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= j <= n, got j={j}, n={n}")
    if isinstance(core, (S.Ellipsoid, S.Ball)):
        pass
    elif _vertex_cloud(core) is not None:
        if j > 3:
            raise S.UnsupportedComposition("hull volumes are limited to projected dimension j <= 3")
    else:
        raise S.UnsupportedComposition(f"mc_tsirelson does not support {core.kind}")
    log_fact = gammaln(j + 1)
    means, sizes = [], batch_sizes(samples, batches)
    for b, m in enumerate(sizes):
        rng = rng_for(seed, j, b)
        vals = np.empty(m)
        for i in range(m):
            G = rng.standard_normal((j, n))
            vals[i] = _tsirelson_sample(core, j, G, rotation)
        means.append(vals.mean())
    mean, se = batch_means_se(np.array(means), np.array(sizes))
    c = math.exp(-log_fact) * t ** j
    return VolumeEstimate(mean * c, se * c, samples, seed)


def mc_kubota(spec: S.SetSpec, j: int, samples: int = 20_000, seed: int = 0,
              batches: int = 16) -> VolumeEstimate:
    """Estimate V_j(K) = C(n,j) kappa_n / (kappa_j kappa_{n-j}) E vol_j(P_E K).

    E is a uniformly random j-dimensional subspace.  j = 1 uses the support
    function (width in a random direction); j = 2, 3 need a vertex cloud.
    """
    n = spec.dim
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= j <= n, got j={j}, n={n}")
    core, t = _unwrap(spec)
    P = _vertex_cloud(core)
    if j > 1 and (P is None or j > 3):
        raise S.UnsupportedComposition("Kubota estimates for j > 1 need a vertex cloud and j <= 3")
    k = kappa_table(n)
    const = comb(n, j, exact=False) * k[n] / (k[j] * k[n - j])
    means, sizes = [], batch_sizes(samples, batches)
    for b, m in enumerate(sizes):
        rng = rng_for(seed, 1000 + j, b)
        if j == 1:
            U = rng.standard_normal((m, n))
            U /= np.linalg.norm(U, axis=1, keepdims=True)
            vals = S.support(spec, U) + S.support(spec, -U)
        else:
            vals = np.empty(m)
            for i in range(m):
                Q, _ = np.linalg.qr(rng.standard_normal((n, j)))
                vals[i] = _hull_volume(P @ Q) * t ** j
        means.append(np.mean(vals))
    mean, se = batch_means_se(np.array(means), np.array(sizes))
    return VolumeEstimate(float(const * mean), float(const * se), samples, seed)


def mc_volumes(spec: S.SetSpec, samples: int = 20_000, seed: int = 0,
               batches: int = 16) -> IntrinsicVolumeSeq:
    """Full Monte Carlo sequence V_0..V_n (in the body's own units)."""
    n = spec.dim
    v, se = [1.0], [0.0]
    for j in range(1, n + 1):
        est = mc_tsirelson(spec, j, samples, seed, batches)
        c = (2.0 * math.pi) ** (j / 2.0)
        v.append(max(est.value * c, 0.0))
        se.append(est.se * c)
    return IntrinsicVolumeSeq(np.array(v), "monte_carlo", np.array(se))


# --------------------------------------------------------- Steiner, regret

def steiner_parallel_volume(seq: IntrinsicVolumeSeq, r: float) -> float:
    """vol_n(K + r B) = sum_j V_{n-j}(K) kappa_j r^j."""
    if seq.provenance != "exact":
        raise ValueError("Steiner evaluation needs an exact sequence")
    n = seq.dim
    k = kappa_table(n)
    j = np.arange(n + 1)
    return float(np.sum(seq.values[n - j] * k * float(r) ** j))


def regret_from_volumes(seq: IntrinsicVolumeSeq, t: float = 1.0) -> RegretEstimate:
    """R*(tK) = log sum_j V_j(K) (t / sqrt(2 pi))^j."""
    c = (t / SQRT_2PI) ** np.arange(seq.values.size)
    terms = seq.values * c
    total = float(terms.sum())
    value = math.log(total)
    if seq.provenance == "exact":
        return RegretEstimate(value, "exact")
    se = seq.std_errors if seq.std_errors is not None else np.zeros_like(terms)
    se_log = float(np.sqrt(np.sum((se * c) ** 2))) / total
    return RegretEstimate(value, "monte_carlo", 2.0 * se_log)


@dataclass(frozen=True)
class MaxTermBounds:
    applicable: bool
    lower: float = float("nan")
    upper: float = float("nan")
    regret: float = float("nan")
    argmax: int = 0
    first_volume: float = float("nan")
    notes: tuple = field(default_factory=tuple)

    @property
    def holds(self) -> bool:
        return self.applicable and self.lower <= self.regret + 1e-12 and self.regret <= self.upper + 1e-12


def max_intrinsic_bounds(seq: IntrinsicVolumeSeq, t: float = 1.0) -> MaxTermBounds:
    """Max-term sandwich: when V_1(tK/sqrt(2 pi)) >= 2,

        log max_{1<=j<=n} V_j <= R*(tK) <= 8 log max_{k>=0} V_{2^k},

    all volumes of tK / sqrt(2 pi).
    """
    v = seq.gaussian_normalized(t)
    regret = regret_from_volumes(seq, t).value
    if v[1] < 2.0:
        return MaxTermBounds(False, regret=regret, first_volume=float(v[1]),
                             notes=("first intrinsic volume below 2: sandwich not applicable",))
    tail = v[1:]
    # ties toward the smaller index
    jmax = int(np.argmax(tail)) + 1
    dyadic = [v[2 ** k] for k in range(int(math.log2(seq.dim)) + 1)]
    lower = math.log(tail.max())
    upper = 8.0 * math.log(max(dyadic))
    return MaxTermBounds(True, lower, upper, regret, jmax, float(v[1]))


def rissanen_report(seq: IntrinsicVolumeSeq, n_rep: int) -> dict:
    """Compare the exact regret at sample size n_rep with its volume expansion.

    The expansion is d/2 log(n_rep / 2 pi) + log V_d.  The dominant index is
    the argmax over 1 <= j <= d of V_j(sqrt(n_rep / 2 pi) K).  Two thresholds
    for the top term to beat its neighbour are reported: the direct one,
    n_rep >= (pi/2)(S/V)^2, and the 8 pi (S/V)^2 constant quoted in the
    literature.  Here S = 2 V_{d-1} is the surface area and V = V_d; a body
    with V_d = 0 gets an infinite threshold and expansion -inf.
    """
    d = seq.dim
    t = math.sqrt(n_rep)
    v = seq.gaussian_normalized(t)
    dominant = int(np.argmax(v[1:d + 1])) + 1
    exact = regret_from_volumes(seq, t).value
    vol = float(seq.values[d])
    if vol > 0:
        ratio2 = (2.0 * float(seq.values[d - 1]) / vol) ** 2
        expansion = 0.5 * d * math.log(n_rep / (2.0 * math.pi)) + math.log(vol)
    else:
        # flat body: the top term vanishes and never dominates
        ratio2, expansion = math.inf, -math.inf
    direct_n = 0.5 * math.pi * ratio2
    return {
        "n_rep": int(n_rep),
        "dim": d,
        "expansion": expansion,
        "regret": exact,
        "remainder": exact - expansion,
        "dominant_index": dominant,
        "top_beats_previous": bool(vol > 0 and (d == 1 or v[d] >= v[d - 1])),
        "direct_threshold_n": float(direct_n),
        "direct_condition_holds": bool(n_rep >= direct_n),
        "literature_threshold_n": float(8.0 * math.pi * ratio2),
        "literature_condition_holds": bool(n_rep >= 8.0 * math.pi * ratio2),
    }
