"""Randomized property suites for the inequalities satisfied by R*, Red and
the intrinsic volumes.

Each check compares two bracketed quantities, lhs <= rhs.  A quantity has a
deterministic bracket [lo, hi] (exact values, quadrature tolerances, bound
intervals) and a statistical standard error.  With budget = 4 * combined SE,
an instance is

* violated when rhs.hi - lhs.lo < -budget,
* clear when rhs.lo - lhs.hi > budget,
* close otherwise (the budget dominates the margin).

A check fails on any violation and is inconclusive when more than 20% of its
instances are close; instances where equality is expected are not counted
as close.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import sets as S
from ._numerics import SQRT_2PI, rng_for
from .coding import best_tilde_q_redundancy, choose_lambda, redundancy_bounds, two_point_redundancy
from .complexity import ball_width, complexity_profile, gaussian_width
from .estimate import MCConfig, RegretEstimate
from .intrinsic import (ball_volumes, box_volumes, log_concavity_slack, max_intrinsic_bounds,
                        segment_volumes)
from .regret import large_scale_report, regret, regret_exact

__all__ = [
    "Quantity", "Instance", "PropertyCheck", "ContractionSpec", "SUITES", "run_suite",
    "run_suites", "report_json", "summary_table", "random_cloud", "random_spectrum",
    "random_contraction",
]

K_SE = 4.0
INCONCLUSIVE_SHARE = 0.2
_SUITE_IDS = {
    "comparison": 1, "additive": 2, "scaling": 3, "characterizations": 4,
    "volume_sequence": 5, "mcmullen": 6, "reverse": 7, "dilation": 8, "red_le_regret": 9,
}


# ------------------------------------------------------------ quantities

@dataclass(frozen=True)
class Quantity:
    value: float
    lo: float
    hi: float
    se: float = 0.0

    @classmethod
    def exact(cls, v: float) -> "Quantity":
        v = float(v)
        return cls(v, v, v)

    @classmethod
    def of(cls, est: RegretEstimate) -> "Quantity":
        if est.method == "monte_carlo":
            return cls(est.value, est.value, est.value, est.se)
        return cls(est.value, est.lo, est.hi)

    @classmethod
    def bracket(cls, lo: float, hi: float) -> "Quantity":
        return cls(0.5 * (lo + hi), float(lo), float(hi))

    def __mul__(self, c: float) -> "Quantity":
        c = float(c)
        lo, hi = (c * self.lo, c * self.hi) if c >= 0 else (c * self.hi, c * self.lo)
        return Quantity(c * self.value, lo, hi, abs(c) * self.se)

    __rmul__ = __mul__

    def __add__(self, other: "Quantity") -> "Quantity":
        return Quantity(self.value + other.value, self.lo + other.lo, self.hi + other.hi,
                        math.hypot(self.se, other.se))

    def __sub__(self, other: "Quantity") -> "Quantity":
        return self + (-1.0) * other


def qmax(*qs: Quantity) -> Quantity:
    i = int(np.argmax([q.value for q in qs]))
    return Quantity(qs[i].value, max(q.lo for q in qs), max(q.hi for q in qs), qs[i].se)


@dataclass
class Instance:
    params: dict
    lhs: Quantity
    rhs: Quantity
    expect_equal: bool = False

    @property
    def budget(self) -> float:
        return K_SE * math.hypot(self.lhs.se, self.rhs.se)

    @property
    def margin(self) -> float:
        return self.rhs.value - self.lhs.value

    @property
    def status(self) -> str:
        b = self.budget
        if self.rhs.hi - self.lhs.lo < -b - 1e-12 * (1 + abs(self.lhs.value)):
            return "violated"
        if self.expect_equal or self.rhs.lo - self.lhs.hi > b:
            return "clear"
        return "close"

    def to_dict(self) -> dict:
        return {"params": self.params, "lhs": asdict(self.lhs), "rhs": asdict(self.rhs),
                "margin": self.margin, "budget": self.budget, "status": self.status,
                "expect_equal": self.expect_equal}


@dataclass
class PropertyCheck:
    name: str
    statement: str
    instances: list = field(default_factory=list)
    error_budget_policy: str = "4 x combined standard error; deterministic brackets as declared"
    seconds: float = 0.0

    @property
    def instance_count(self) -> int:
        return len(self.instances)

    @property
    def violations(self) -> int:
        return sum(i.status == "violated" for i in self.instances)

    @property
    def close(self) -> int:
        return sum(i.status == "close" for i in self.instances)

    @property
    def worst_margin(self) -> float:
        if not self.instances:
            return float("nan")
        return float(min(i.rhs.hi - i.lhs.lo + i.budget for i in self.instances))

    @property
    def verdict(self) -> str:
        if self.violations:
            return "fail"
        if not self.instances or self.close > INCONCLUSIVE_SHARE * self.instance_count:
            return "inconclusive"
        return "pass"

    def to_dict(self, with_instances: bool = True) -> dict:
        d = {"name": self.name, "statement": self.statement, "instance_count": self.instance_count,
             "violations": self.violations, "close": self.close, "worst_margin": self.worst_margin,
             "error_budget_policy": self.error_budget_policy, "verdict": self.verdict}
        if with_instances:
            d["instances"] = [i.to_dict() for i in self.instances]
        return d


# ------------------------------------------------------------ generators

def random_cloud(rng: np.random.Generator, n: int, k: int, scale: float | None = None) -> S.FinitePoints:
    """Gaussian, spherical or lattice point cloud."""
    kind = ("gaussian", "sphere", "lattice")[int(rng.integers(3))]
    s = float(np.exp(rng.uniform(np.log(0.3), np.log(3.0)))) if scale is None else scale
    if kind == "gaussian":
        P = rng.standard_normal((k, n))
    elif kind == "sphere":
        P = rng.standard_normal((k, n))
        P /= np.linalg.norm(P, axis=1, keepdims=True)
    else:
        grid = np.stack(np.meshgrid(*[np.arange(-2, 3)] * n, indexing="ij"), -1).reshape(-1, n)
        P = 0.5 * grid[rng.choice(grid.shape[0], size=min(k, grid.shape[0]), replace=False)]
    P = np.unique(s * P, axis=0)
    if P.shape[0] == 1:
        P = np.vstack([P, P + s])
    return S.FinitePoints(P)


def random_spectrum(rng: np.random.Generator, n: int) -> np.ndarray:
    """Ellipsoid half-axes: flat, geometric or polynomial decay, decreasing."""
    kind = int(rng.integers(3))
    c = float(np.exp(rng.uniform(np.log(0.5), np.log(8.0))))
    i = np.arange(1, n + 1)
    if kind == 0:
        a = np.full(n, c)
    elif kind == 1:
        a = c * rng.uniform(0.3, 0.8) ** (i - 1)
    else:
        a = c * i ** (-rng.uniform(0.5, 2.0))
    return a


@dataclass(frozen=True)
class ContractionSpec:
    """x -> P_m(s Q x) + b: orthogonal map Q, shrink s <= 1, projection onto
    the first m coordinates, then translation b."""

    Q: np.ndarray
    shrink: float
    keep: int
    shift: np.ndarray

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return (self.shrink * X @ self.Q.T)[:, :self.keep] + self.shift

    def describe(self) -> dict:
        return {"shrink": self.shrink, "keep": self.keep, "dim": int(self.Q.shape[0]),
                "shift": self.shift.tolist()}

    def check_lipschitz(self, rng: np.random.Generator, pairs: int = 200) -> float:
        n = self.Q.shape[0]
        X, Y = rng.standard_normal((pairs, n)), rng.standard_normal((pairs, n))
        ratio = np.linalg.norm(self(X) - self(Y), axis=1) / np.linalg.norm(X - Y, axis=1)
        if np.any(ratio > 1 + 1e-12):
            raise ValueError("map is not a contraction")
        return float(ratio.max())


def random_contraction(rng: np.random.Generator, n: int, kind: str = "random") -> ContractionSpec:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if kind == "identity":
        return ContractionSpec(np.eye(n), 1.0, n, np.zeros(n))
    if kind == "shrink":
        return ContractionSpec(np.eye(n), 0.5, n, np.zeros(n))
    if kind == "projection":
        return ContractionSpec(np.eye(n), 1.0, n - 1, np.zeros(n - 1))
    keep = n - 1 if (n > 1 and rng.random() < 0.3) else n
    s = float(rng.uniform(0.3, 0.95))
    return ContractionSpec(Q, s, keep, rng.standard_normal(keep))


# ------------------------------------------------------------ evaluation

def _rstar(spec: S.SetSpec, seed: int, samples: int = 40_000) -> Quantity:
    """Closed form, then Voronoi cells for finite sets, quadrature for n <= 2
    and Monte Carlo above."""
    cfg = MCConfig(samples=samples, seed=seed)
    try:
        return Quantity.of(regret_exact(spec))
    except S.UnsupportedComposition:
        pass
    if S.as_points(spec) is not None:
        return Quantity.of(regret(spec, "auto", tol=1e-7, cfg=cfg))
    if spec.dim <= 2:
        return Quantity.of(regret(spec, "quadrature", tol=1e-6))
    return Quantity.of(regret(spec, "mc", cfg=MCConfig(samples=10 * samples, seed=seed)))


def _width(spec: S.SetSpec, seed: int) -> Quantity:
    w = gaussian_width(spec, MCConfig(samples=40_000, seed=seed))
    return Quantity(w.value, w.value, w.value, w.se)


def _cloud_dims(rng, trials, dims=(1, 2, 3), kmax=10):
    for i in range(trials):
        n = dims[i % len(dims)]
        k = int(rng.integers(2, kmax + 1))
        yield i, n, k


def _suite_comparison(seed: int, trials: int) -> list[PropertyCheck]:
    chk = PropertyCheck("comparison", "R*(phi(A)) <= R*(A) for contractions phi")
    rng = rng_for(seed, _SUITE_IDS["comparison"])
    for i, n, k in _cloud_dims(rng, trials, dims=(2, 3, 1)):
        kind = {0: "identity", 1: "shrink", 2: "projection"}.get(i, "random")
        if kind == "projection" and n == 1:
            kind = "random"
        A = random_cloud(rng, n, k)
        phi = random_contraction(rng, n, kind)
        phi.check_lipschitz(rng)
        B = S.FinitePoints(np.unique(phi(A.points), axis=0))
        lhs, rhs = _rstar(B, seed + i), _rstar(A, seed + i)
        eq = kind == "identity"
        chk.instances.append(Instance({"n": n, "k": A.size, "map": phi.describe()}, lhs, rhs, eq))
    return [chk]


def _suite_additive(seed: int, trials: int) -> list[PropertyCheck]:
    conc = PropertyCheck("concavity", "lam R*(A) + (1-lam) R*(B) <= R*(lam A + (1-lam) B)")
    sub = PropertyCheck("subadditivity", "R*(A + B) <= R*(A) + R*(B)")
    diff = PropertyCheck("difference", "R*(A - A) <= 2 R*(A)")
    rng = rng_for(seed, _SUITE_IDS["additive"])
    for i, n, _ in _cloud_dims(rng, trials):
        kmax = 8 if n < 3 else 5
        A = random_cloud(rng, n, int(rng.integers(2, kmax + 1)))
        B = A if i == 0 else random_cloud(rng, n, int(rng.integers(2, kmax + 1)))
        lam = {1: 0.0, 2: 1.0}.get(i, float(rng.uniform(0.1, 0.9)))
        rA, rB = _rstar(A, seed + i), _rstar(B, seed + i + 10_000)
        mix = S.FinitePoints(S.as_points(S.MinkowskiSum((S.Scale(lam, A), S.Scale(1 - lam, B))))
                             if 0 < lam < 1 else (A.points if lam == 1 else B.points))
        eq = i in (1, 2)   # lam in {0, 1}; A = B finite is strict since lam A + (1-lam) A contains A
        conc.instances.append(Instance({"n": n, "kA": A.size, "kB": B.size, "lam": lam},
                                       lam * rA + (1 - lam) * rB, _rstar(mix, seed + i + 20_000), eq))
        AB = S.FinitePoints(S.as_points(S.MinkowskiSum((A, B))))
        sub.instances.append(Instance({"n": n, "kA": A.size, "kB": B.size},
                                      _rstar(AB, seed + i + 30_000), rA + rB))
        AmA = S.FinitePoints(S.as_points(S.MinkowskiSum((A, S.FinitePoints(-A.points)))))
        diff.instances.append(Instance({"n": n, "k": A.size},
                                       _rstar(AmA, seed + i + 40_000), 2.0 * rA))
    return [conc, sub, diff]


def _convex_instance(rng: np.random.Generator) -> S.SetSpec:
    c = int(rng.integers(4))
    n = int(rng.integers(1, 4))
    s = float(np.exp(rng.uniform(np.log(0.2), np.log(3.0))))
    if c == 0:
        return S.Ball(np.zeros(n), s)
    if c == 1:
        return S.Box(np.zeros(n), s * rng.uniform(0.2, 2.0, n))
    if c == 2:
        return S.Segment(np.vstack([np.zeros(n), s * rng.standard_normal(n)]))
    return S.Ellipsoid(s * rng.uniform(0.2, 2.0, 2))


def _suite_mcmullen(seed: int, trials: int) -> list[PropertyCheck]:
    chk = PropertyCheck("mcmullen", "R*(A) <= w(A)")
    rng = rng_for(seed, _SUITE_IDS["mcmullen"])
    for i in range(trials):
        if i % 2 == 0:
            A = random_cloud(rng, 1 + (i // 2) % 3, int(rng.integers(2, 11)))
        else:
            A = _convex_instance(rng)
        chk.instances.append(Instance({"kind": A.kind, "n": A.dim}, _rstar(A, seed + i),
                                      _width(A, seed + i)))
    return [chk]


def _enclosing_radius(A: S.SetSpec) -> float:
    P = S.as_points(A)
    if P is not None:
        return float(np.linalg.norm(P - P.mean(axis=0), axis=1).max())
    lo, hi = A.bbox()
    return 0.5 * float(np.linalg.norm(hi - lo))


def _suite_reverse(seed: int, trials: int) -> list[PropertyCheck]:
    chk = PropertyCheck("reverse", "w(A) - r^2/2 <= R*(A) when A lies in a ball of radius r")
    rng = rng_for(seed, _SUITE_IDS["reverse"])
    for i in range(trials):
        if i % 2 == 0:
            A = random_cloud(rng, 1 + (i // 2) % 3, int(rng.integers(2, 11)),
                             scale=float(rng.uniform(0.2, 1.5)))
        else:
            A = _convex_instance(rng)
        r = _enclosing_radius(A)
        lhs = _width(A, seed + i) - Quantity.exact(0.5 * r * r)
        chk.instances.append(Instance({"kind": A.kind, "n": A.dim, "r": r}, lhs, _rstar(A, seed + i)))
    return [chk]


def _suite_dilation(seed: int, trials: int) -> list[PropertyCheck]:
    inc = PropertyCheck("dilation_increasing", "R*(sA) <= R*(tA) for s < t")
    slope = PropertyCheck("dilation_slope", "R*(tA)/t <= R*(sA)/s for s < t")
    rng = rng_for(seed, _SUITE_IDS["dilation"])
    for i in range(trials):
        A = random_cloud(rng, 1 + i % 3, int(rng.integers(2, 9))) if i % 3 else _convex_instance(rng)
        s = float(np.exp(rng.uniform(np.log(0.1), np.log(3.0))))
        t = s * float(rng.uniform(1.2, 3.0))
        rs = _rstar(S.Scale(s, A), seed + i)
        rt = _rstar(S.Scale(t, A), seed + i + 50_000)
        p = {"kind": A.kind, "n": A.dim, "s": s, "t": t}
        inc.instances.append(Instance(p, rs, rt))
        slope.instances.append(Instance(p, (1.0 / t) * rt, (1.0 / s) * rs))
    return [inc, slope]


def _suite_red_le_regret(seed: int, trials: int) -> list[PropertyCheck]:
    chk = PropertyCheck("red_le_regret", "Red(A) <= R*(A)")
    chk.error_budget_policy += "; Red enters through its certified lower bound"
    rng = rng_for(seed, _SUITE_IDS["red_le_regret"])
    for i in range(trials):
        kind = i % 4
        if kind == 0:
            n = int(rng.integers(1, 4))
            rho = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
            A = S.FinitePoints(np.vstack([np.zeros(n), rho * np.eye(n)[0]]))
            red = two_point_redundancy(rho)
            lhs = Quantity.bracket(red.lo, red.hi)
        else:
            if kind == 3:
                A = S.Segment(np.array([[0.0], [float(rng.uniform(0.2, 6.0))]]))
            else:
                A = random_cloud(rng, 1 if kind == 1 else 2, int(rng.integers(2, 8)))
            rb = redundancy_bounds(A, MCConfig(samples=32_000, seed=seed + i))
            lhs = Quantity.bracket(rb.lower, rb.lower)
        chk.instances.append(Instance({"kind": A.kind, "n": A.dim}, lhs, _rstar(A, seed + i)))
    return [chk]


def _suite_scaling(seed: int, trials: int) -> list[PropertyCheck]:
    small = PropertyCheck("small_scale", "|R*(tA) / (t w(A)) - 1| <= 0.02 at t = 1e-3")
    large = PropertyCheck("large_scale", "|R*(tK) - n log t - log vol(K/sqrt(2 pi))| <= 0.05 at t = 50, unit square")
    seg = PropertyCheck("segment_curve", "R*(t [0, sqrt(2 pi)]) = log(1 + t)")
    for chk in (small, large):
        chk.error_budget_policy = "tolerance stated in the check; values from closed forms"
    rng = rng_for(seed, _SUITE_IDS["scaling"])
    t = 1e-3
    shapes = [
        S.Segment(np.array([[0.0, 0.0], [3.0, 4.0]])),
        S.Ball(np.zeros(3), 1.0),
        S.Box(np.zeros(2), np.array([1.0, 2.0])),
        S.FinitePoints(np.array([[0.0], [2.0]])),
        S.FinitePoints(np.array([[0.0], [0.5], [3.0]])),
    ]
    w_exact = [5.0 / SQRT_2PI, ball_width(3), 3.0 / SQRT_2PI, 2.0 / SQRT_2PI, 3.0 / SQRT_2PI]
    for A, w in zip(shapes, w_exact):
        r = regret_exact(S.Scale(t, A)).value
        dev = abs(r / (t * w) - 1.0)
        small.instances.append(Instance({"kind": A.kind, "n": A.dim, "t": t, "ratio": r / (t * w)},
                                        Quantity.exact(dev), Quantity.exact(0.02)))
    rep = large_scale_report(S.Box(np.zeros(2), np.ones(2)), 50.0)
    large.instances.append(Instance({"t": 50.0, "wills_gap": rep["wills_gap"]},
                                    Quantity.exact(abs(rep["gap"])), Quantity.exact(0.05)))
    slope_dec = PropertyCheck("wills_slope", "t -> log W(tK)/t non-increasing for convex K")
    for i in range(max(trials // 10, 3)):
        A = _convex_instance(rng)
        ts = np.sort(np.exp(rng.uniform(np.log(0.05), np.log(20.0), 2)))
        th = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        segA = S.Segment(np.array([[0.0], [SQRT_2PI]]))
        r = regret(S.Scale(th, segA), "exact").value
        seg.instances.append(Instance({"t": th}, Quantity.exact(r), Quantity.exact(math.log1p(th)), True))
        v = [_rstar(S.Scale(SQRT_2PI * x, A), seed + i) for x in ts]
        slope_dec.instances.append(Instance({"kind": A.kind, "t": ts.tolist()},
                                            (1.0 / ts[1]) * v[1], (1.0 / ts[0]) * v[0]))
    return [small, large, seg, slope_dec]


def _suite_volume_sequence(seed: int, trials: int) -> list[PropertyCheck]:
    lc = PropertyCheck("poisson_log_concavity", "(j+1) V_{j+1} V_{j-1} <= j V_j^2")
    lc.error_budget_policy = "relative slack 1e-9"
    mt = PropertyCheck("max_term", "log max_j V_j <= R*(tK) <= 8 log max_k V_{2^k} when V_1 >= 2")
    mt.error_budget_policy = "exact; instances with V_1 < 2 are skipped"
    rng = rng_for(seed, _SUITE_IDS["volume_sequence"])
    seqs = []
    for i in range(trials):
        n = int(rng.integers(1, 21))
        if i % 3 == 0:
            seq, desc = ball_volumes(n, float(np.exp(rng.uniform(-1, 2)))), {"kind": "ball", "n": n}
        elif i % 3 == 1:
            seq, desc = box_volumes(np.exp(rng.uniform(-1.5, 1.5, n))), {"kind": "box", "n": n}
        else:
            seq, desc = segment_volumes(float(np.exp(rng.uniform(-1, 3))), n), {"kind": "segment", "n": n}
        seqs.append((seq, desc))
    seqs.append((ball_volumes(20, 1.0), {"kind": "ball", "n": 20}))
    for seq, desc in seqs:
        slack = log_concavity_slack(seq.values)
        worst = float(slack.min()) if slack.size else 0.0
        lc.instances.append(Instance(dict(desc, worst_slack=worst), Quantity.exact(-1e-9),
                                     Quantity.exact(worst), expect_equal=(slack.size == 0 or worst < 1e-9)))
        t = float(np.exp(rng.uniform(np.log(0.5), np.log(20.0))))
        mb = max_intrinsic_bounds(seq, t)
        if mb.applicable:
            mt.instances.append(Instance(dict(desc, t=t, side="lower"), Quantity.exact(mb.lower),
                                         Quantity.exact(mb.regret), expect_equal=True))
            mt.instances.append(Instance(dict(desc, t=t, side="upper"), Quantity.exact(mb.regret),
                                         Quantity.exact(mb.upper), expect_equal=True))
    return [lc, mt]


# ---------------------------------------------------- characterizations

def _ellipsoid_inf(a: np.ndarray, f) -> float:
    """inf over r > 0 of f(r), on a dense log grid refined around the minimum."""
    r = np.geomspace(float(a.min()) * 1e-3, float(a.max()) * 10.0, 4000)
    v = np.array([f(x) for x in r])
    j = int(np.argmin(v))
    fine = np.geomspace(r[max(j - 1, 0)], r[min(j + 1, r.size - 1)], 2001)
    # the functions involved are step-plus-smooth; include the breakpoints a_i/2
    cand = np.concatenate([fine, a / 2.0, a / 2.0 * (1 - 1e-12)])
    return float(min(v[j], min(f(x) for x in cand)))


def _characterization_checks() -> dict:
    names = {
        "regret_fixed_point_lower": "max(r*^2/2, r~^2/300) <= R*",
        "regret_fixed_point_upper": "R* <= 2 max(r*^2, r~^2)",
        "regret_sum_lower": "inf{w_A + log N}/600 <= R*",
        "regret_sum_upper": "R* <= inf{w_A + log N}",
        "red_fixed_point_lower": "r~^2/300 <= Red",
        "red_fixed_point_upper": "Red <= 2 r~^2",
        "red_sum_lower": "inf{log N + r^2}/600 <= Red",
        "red_sum_upper": "Red <= inf{log N + r^2}",
        "wills_sum_lower": "inf{log N + w_K}/600 <= log sum_j V_j(K)",
        "wills_sum_upper": "log sum_j V_j(K) <= sqrt(2 pi) inf{log N + w_K}",
        "ellipsoid_regret_lower": "inf{sum log(1 + a^2/r^2) + r^2}/6000 <= R*(E)",
        "ellipsoid_regret_upper": "R*(E) <= 10 inf{sum log(1 + a^2/r^2) + r^2}",
        "ellipsoid_ridge": "ridge bound <= 3000 R*(E)",
        "ellipsoid_red_lower": "inf{sum_{a>=2r} log(a/r) + r^2}/600 <= Red(E)",
        "ellipsoid_red_upper": "Red(E) <= 5 inf{sum_{a>=2r} log(a/r) + r^2}",
        "ellipsoid_tilde_q": "sup_E KL(p || tilde q) <= 1200 Red(E)",
    }
    return {k: PropertyCheck(k, v) for k, v in names.items()}


def _characterize(chks: dict, A: S.SetSpec, params: dict, seed: int, convex: bool):
    prof = complexity_profile(A, MCConfig(samples=8_000, seed=seed))
    rs, rt = prof.r_star, prof.r_tilde
    R = _rstar(A, seed, samples=40_000)
    rb = redundancy_bounds(A, MCConfig(samples=32_000, seed=seed), profile=prof)
    red = Quantity.bracket(rb.lower, rb.upper)
    sq = lambda iv: Quantity.bracket(iv[0] ** 2, iv[1] ** 2)
    reg_inf = Quantity.bracket(*prof.inf_regret_form)
    red_inf = Quantity.bracket(*prof.inf_red_form)
    add = lambda name, lhs, rhs: chks[name].instances.append(Instance(dict(params), lhs, rhs))
    add("regret_fixed_point_lower", qmax(0.5 * sq(rs), (1 / 300) * sq(rt)), R)
    add("regret_fixed_point_upper", R, 2.0 * qmax(sq(rs), sq(rt)))
    add("regret_sum_lower", (1 / 600) * reg_inf, R)
    add("regret_sum_upper", R, reg_inf)
    add("red_fixed_point_lower", (1 / 300) * sq(rt), red)
    add("red_fixed_point_upper", red, 2.0 * sq(rt))
    add("red_sum_lower", (1 / 600) * red_inf, red)
    add("red_sum_upper", red, red_inf)
    if convex:
        # log sum V_j(K) = R*(sqrt(2 pi) K); the width of K is the local-width bound at r >= diam
        W = _rstar(S.Scale(SQRT_2PI, A), seed + 1, samples=40_000)
        add("wills_sum_lower", (1 / 600) * reg_inf, W)
        add("wills_sum_upper", W, SQRT_2PI * reg_inf)
    return R, red


def _suite_characterizations(seed: int, trials: int) -> list[PropertyCheck]:
    chks = _characterization_checks()
    rng = rng_for(seed, _SUITE_IDS["characterizations"])
    n_clouds = max(trials * 3 // 4, 1)
    n_ell = max(trials - n_clouds, 1)
    for i in range(n_clouds):
        n = 1 + i % 6
        A = random_cloud(rng, n, int(rng.integers(2, 25)))
        _characterize(chks, A, {"kind": "cloud", "n": n, "k": A.size}, seed + i, convex=False)
    for i in range(n_ell):
        n = int(rng.integers(2, 9))
        a = np.sort(random_spectrum(rng, n))[::-1]
        E = S.Ellipsoid(a)
        p = {"kind": "ellipsoid", "axes": a.tolist()}
        R, red = _characterize(chks, E, p, seed + 1000 + i, convex=True)
        f_reg = _ellipsoid_inf(a, lambda r: float(np.sum(np.log1p(a * a / (r * r))) + r * r))
        f_red = _ellipsoid_inf(a, lambda r: float(np.sum(np.log(a[a >= 2 * r] / r)) + r * r))
        add = lambda name, lhs, rhs: chks[name].instances.append(Instance(dict(p), lhs, rhs))
        add("ellipsoid_regret_lower", Quantity.exact(f_reg / 6000), R)
        add("ellipsoid_regret_upper", R, Quantity.exact(10 * f_reg))
        add("ellipsoid_ridge", Quantity.exact(choose_lambda(a)[1]), 3000.0 * R)
        add("ellipsoid_red_lower", Quantity.exact(f_red / 600), red)
        add("ellipsoid_red_upper", red, Quantity.exact(5 * f_red))
        add("ellipsoid_tilde_q", Quantity.exact(best_tilde_q_redundancy(a)[1]), 1200.0 * red)
    return list(chks.values())


SUITES = {
    "comparison": _suite_comparison,
    "additive": _suite_additive,
    "mcmullen": _suite_mcmullen,
    "reverse": _suite_reverse,
    "dilation": _suite_dilation,
    "red_le_regret": _suite_red_le_regret,
    "scaling": _suite_scaling,
    "characterizations": _suite_characterizations,
    "volume_sequence": _suite_volume_sequence,
}


def run_suite(name: str, trials: int = 100, seed: int = 0) -> list[PropertyCheck]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    t0 = time.perf_counter()
    checks = SUITES[name](seed, trials)
    dt = time.perf_counter() - t0
    for c in checks:
        c.seconds = dt / len(checks)
    return checks


def run_suites(names, trials: int = 100, seed: int = 0) -> list[PropertyCheck]:
    out = []
    for name in names:
        out.extend(run_suite(name, trials, seed))
    return out


def report_json(checks, seed: int, trials: int, with_instances: bool = True) -> str:
    doc = {"seed": seed, "trials": trials,
           "checks": [c.to_dict(with_instances) for c in checks],
           "verdict": _overall(checks)}
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _overall(checks) -> str:
    verdicts = {c.verdict for c in checks}
    if "fail" in verdicts:
        return "fail"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "pass"


def summary_table(checks) -> str:
    rows = [("check", "instances", "violations", "close", "worst margin", "verdict")]
    for c in checks:
        rows.append((c.name, str(c.instance_count), str(c.violations), str(c.close),
                     f"{c.worst_margin:.3g}", c.verdict))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(s.ljust(w) for s, w in zip(r, widths)) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
