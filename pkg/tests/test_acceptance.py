"""Acceptance criteria 1-10.

Each criterion is a function returning (ok, detail); the pytest wrappers print
one ``ACCEPTANCE k: PASS|FAIL`` line per criterion and then assert.  Running
this file as a script prints the same lines without pytest.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from gaussregret import sets as S
from gaussregret.coding import (
    Gaussian, GaussianDensity, log_density, redundancy_bounds, ridge_identity, sequential_predict,
)
from gaussregret.complexity import ball_width
from gaussregret.intrinsic import (
    ball_volumes, box_volumes, exact_volumes, log_concavity_slack, max_intrinsic_bounds,
    regret_from_volumes, rissanen_report,
)
from gaussregret.regret import MCConfig, regret, regret_exact, regret_mc, regret_quadrature
from gaussregret.verify import run_suite

SQ2PI = math.sqrt(2 * math.pi)
ROOT = Path(__file__).resolve().parents[1]


# ------------------------------------------------------------ criteria

def criterion_1():
    worst, slow = 0.0, 0.0
    for theta in (0.5, 1.0, 10.0):
        t0 = time.perf_counter()
        v = regret_quadrature(S.Segment([[0.0], [SQ2PI * theta]]), 1e-6).value
        slow = max(slow, time.perf_counter() - t0)
        worst = max(worst, abs(v - math.log1p(theta)))
    return worst <= 1e-5 and slow < 1.0, f"max |err| = {worst:.2e}, slowest {slow:.3f} s"


def criterion_2():
    t0 = time.perf_counter()
    notes, ok = [], True
    for spec in (S.Ball([0.0, 0.0, 0.0], 1.5), S.Box([0.0, 0.0], [SQ2PI, SQ2PI])):
        exact = regret_exact(spec).value
        mc = regret_mc(spec, MCConfig(samples=1_000_000, seed=0))
        quad = regret_quadrature(spec, 1e-6).value
        ok &= abs(mc.value - exact) <= 3 * mc.half_width and abs(quad - exact) <= 1e-4
        notes.append(f"{spec.kind}: mc {abs(mc.value - exact) / mc.half_width:.2f} hw, quad {abs(quad - exact):.1e}")
    dt = time.perf_counter() - t0
    return ok and dt < 60, "; ".join(notes) + f"; {dt:.1f} s"


def _random_body(rng):
    kind = rng.integers(3)
    n = int(rng.integers(1, 3))
    if kind == 0:
        return S.Ball(rng.standard_normal(n), float(rng.uniform(0.2, 2)))
    if kind == 1:
        return S.Box(rng.standard_normal(n), rng.uniform(0.2, 3, n))
    P = rng.standard_normal((2, n))
    return S.Segment(P)


def criterion_3():
    rng = np.random.default_rng(2024)
    worst_exact, worst_z = 0.0, 0.0
    for i in range(20):
        A, B = _random_body(rng), _random_body(rng)
        AB = S.Product((A, B))
        # exact path: convolution of intrinsic volumes, independent of the additive shortcut
        lhs = regret_from_volumes(exact_volumes(AB)).value
        rhs = regret_from_volumes(exact_volumes(A)).value + regret_from_volumes(exact_volumes(B)).value
        worst_exact = max(worst_exact, abs(lhs - rhs))
        cfg = lambda s: MCConfig(samples=200_000, seed=s)
        m_ab, m_a, m_b = regret_mc(AB, cfg(3 * i)), regret_mc(A, cfg(3 * i + 1)), regret_mc(B, cfg(3 * i + 2))
        se = math.sqrt(m_ab.se ** 2 + m_a.se ** 2 + m_b.se ** 2)
        worst_z = max(worst_z, abs(m_ab.value - m_a.value - m_b.value) / se)
    return worst_exact <= 1e-9 and worst_z <= 3, f"exact max |diff| = {worst_exact:.1e}; MC max |z| = {worst_z:.2f}"


def criterion_4():
    rng = np.random.default_rng(4)
    worst_ridge = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        a = rng.uniform(0.05, 5, n)
        lam = math.exp(rng.uniform(-4, 4))
        lhs, rhs = ridge_identity(a, lam, 4 * rng.standard_normal(n))
        worst_ridge = max(worst_ridge, abs(lhs - rhs))
    worst_tens = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        M = rng.standard_normal((n, n))
        g = Gaussian(GaussianDensity(rng.standard_normal(n), M @ M.T + 0.3 * np.eye(n)))
        y = 3 * rng.standard_normal(n)
        worst_tens = max(worst_tens, abs(sequential_predict(g, y).cumulative + log_density(g, y)))
    return max(worst_ridge, worst_tens) <= 1e-9, f"ridge {worst_ridge:.1e}, tensorization {worst_tens:.1e}"


def criterion_5():
    rng = np.random.default_rng(5)
    seqs = [ball_volumes(n, float(np.exp(rng.uniform(-1, 2)))) for n in range(1, 21)]
    seqs += [box_volumes(np.exp(rng.uniform(-1.5, 1.5, n))) for n in range(1, 21) for _ in range(3)]
    worst = 0.0
    for s in seqs:
        v = s.values
        j = np.arange(1, v.size - 1)
        # relative slack: j V_j^2 - (j+1) V_{j+1} V_{j-1} >= -1e-9 j V_j^2
        if j.size:
            rel = (j * v[j] ** 2 - (j + 1) * v[j + 1] * v[j - 1]) / (j * v[j] ** 2)
            worst = min(worst, float(rel.min()))
    applicable = holds = 0
    for s in seqs:
        for t in (0.5, 1.0, 3.0, 10.0):
            mb = max_intrinsic_bounds(s, t)
            if mb.applicable:
                applicable += 1
                holds += bool(mb.holds)
    ok = worst >= -1e-9 and holds == applicable and applicable > 0
    return ok, f"worst relative slack {worst:.1e}; sandwich {holds}/{applicable} applicable"


INEQUALITY_SUITES = ("comparison", "additive", "mcmullen", "reverse", "dilation", "red_le_regret")


def criterion_6():
    t0 = time.perf_counter()
    checks = [c for s in INEQUALITY_SUITES for c in run_suite(s, trials=100, seed=0)]
    dt = time.perf_counter() - t0
    bad = [f"{c.name}={c.violations}" for c in checks if c.violations]
    counts = ", ".join(f"{c.name} {c.instance_count}/{c.verdict}" for c in checks)
    return not bad and dt < 600, f"{counts}; violations: {bad or 'none'}; {dt:.0f} s"


def criterion_7():
    checks = run_suite("characterizations", trials=40, seed=0)   # 30 clouds + 10 ellipsoids
    bad = [f"{c.name}:{c.verdict}" for c in checks if c.verdict != "pass"]
    n = sum(c.instance_count for c in checks)
    return not bad, f"{len(checks)} sandwiches, {n} instance checks; not passing: {bad or 'none'}"


def _mixture_kl(rho):
    f = lambda y: norm.pdf(y) * (norm.logpdf(y) + math.log(2)
                                 - np.logaddexp(norm.logpdf(y), norm.logpdf(y, rho)))
    return integrate.quad(f, -40, 40 + rho, epsabs=1e-13, epsrel=1e-12, limit=200)[0]


def criterion_8():
    notes, ok = [], True
    for rho in (0.5, 2.0, 8.0):
        exact = _mixture_kl(rho)
        rb = redundancy_bounds(S.FinitePoints([[0.0], [rho]]))
        lo, hi = rb.route("lower", "pinsker"), rb.route("upper", "net_mixture")
        ok &= lo - 1e-6 <= exact <= hi + 1e-6
        notes.append(f"rho={rho}: {lo:.4f} <= {exact:.4f} <= {hi:.4f}")
    return ok, "; ".join(notes)


def criterion_9():
    t = 1e-3
    cases = [
        (S.Ball(np.zeros(5), 1.0), ball_width(5)),
        (S.Box([0.0, 0.0, 0.0], [1.0, 2.0, 3.0]), 6.0 / SQ2PI),
        (S.Segment([[0.0, 0.0], [3.0, 4.0]]), 5.0 / SQ2PI),
        (S.FinitePoints([[0.0], [2.0]]), 2.0 / SQ2PI),
        (S.FinitePoints([[0.0], [0.5], [3.0]]), 3.0 / SQ2PI),
    ]
    small = max(abs(regret(S.Scale(t, A)).value / (t * w) - 1) for A, w in cases)
    square = S.Box([0.0, 0.0], [1.0, 1.0])
    gap = regret_exact(S.Scale(50.0, square)).value - 2 * math.log(50.0) - math.log(1 / (2 * math.pi))
    mismatches = 0
    for seq in (box_volumes([1.0, 1.0]), box_volumes([1.0, 3.0]), ball_volumes(3, 1.0)):
        d = seq.values.size - 1
        for n in range(1, 301):
            rep = rissanen_report(seq, n)
            terms = seq.values * math.sqrt(n / (2 * math.pi)) ** np.arange(d + 1)
            direct = terms[d] >= terms[d - 1]
            mismatches += (rep["dominant_index"] == d) != direct or rep["direct_condition_holds"] != direct
    ok = small <= 0.02 and abs(gap) <= 0.05 and mismatches == 0
    return ok, (f"small-scale max dev {small:.4f} (<= 0.02); large-scale gap {gap:.4f} (target 0.05); "
                f"Rissanen mismatches {mismatches}/900")


CLI_RUNS = [
    ["regret", "--spec", "specs/ball3.json", "--method", "mc", "--samples", "50000"],
    ["regret", "--spec", "specs/ellipsoid.json"],
    ["redundancy", "--spec", "specs/cloud.json", "--samples", "8000"],
    ["intrinsic", "--spec", "specs/ellipsoid.json", "--samples", "4000"],
    ["complexity", "--spec", "specs/cloud.json", "--format", "json"],
    ["verify", "--suite", "comparison", "--trials", "5", "--instances"],
]


def criterion_10():
    def once(argv):
        return subprocess.run([sys.executable, "-m", "gaussregret", *argv, "--seed", "7"],
                              cwd=ROOT, capture_output=True, check=False).stdout
    diffs = [argv[0] for argv in CLI_RUNS if not once(argv) or once(argv) != once(argv)]
    return not diffs, f"{len(CLI_RUNS)} invocations x 2; differing: {diffs or 'none'}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _line(k, ok, detail):
    return f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("k", range(1, 11))
def test_acceptance(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for k, crit in enumerate(CRITERIA, start=1):
        print(_line(k, *crit()), flush=True)
