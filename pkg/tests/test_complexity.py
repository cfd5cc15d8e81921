import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaussregret import sets as S
from gaussregret.complexity import (
    ball_width, complexity_profile, covering_ellipsoid_bounds, covering_packing, dense_sample,
    entropy_numbers, gaussian_width, gaussian_width_mc, gonzalez, l1_ball_ball_support, local_width,
    phi_step,
)
from gaussregret.estimate import MCConfig

from conftest import K_SE

SQ2PI = math.sqrt(2 * math.pi)


def brute_cover(P, r):
    """Minimum number of closed r-balls centred at points of P (exhaustive)."""
    D = np.linalg.norm(P[:, None] - P[None], axis=2) <= r
    k = len(P)
    for m in range(1, k + 1):
        for C in itertools.combinations(range(k), m):
            if D[list(C)].any(axis=0).all():
                return m
    return k


# ---------------------------------------------------------------- widths

@pytest.mark.parametrize("n", [1, 2, 5, 30])
def test_ball_width_brackets(n):
    w = gaussian_width_mc(S.Ball(np.zeros(n), 1.0), MCConfig(samples=40_000))
    assert (1 + 2 / math.sqrt(n)) ** -0.5 * math.sqrt(n) - K_SE * w.se <= w.value <= math.sqrt(n) + K_SE * w.se
    assert abs(w.value - ball_width(n)) <= K_SE * w.se


def test_ellipsoid_width_bracket():
    w = gaussian_width(S.Ellipsoid([3, 4]))
    assert 5 / math.sqrt(3) - K_SE * w.se <= w.value <= 5 + K_SE * w.se


def test_two_point_width_mc():
    v = np.array([1.0, -2.0, 0.5])
    w = gaussian_width_mc(S.FinitePoints([np.zeros(3), v]), MCConfig(samples=40_000))
    assert abs(w.value - np.linalg.norm(v) / SQ2PI) <= K_SE * w.se


# ---------------------------------------------------------- local widths

def test_local_width_at_diameter_is_global_width():
    P = np.random.default_rng(1).standard_normal((15, 3))
    spec = S.FinitePoints(P)
    lw = local_width(spec, S.diameter(spec) * 1.01, cfg=MCConfig(samples=20_000, seed=1))
    w = gaussian_width_mc(spec, MCConfig(samples=20_000, seed=2))
    assert abs(lw.value - w.value) <= K_SE * math.hypot(lw.se, w.se)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_local_width_ellipsoid_bracket(r):
    a = np.array([4.0, 2.0, 1.0, 0.5, 0.25])
    lw = local_width(S.Ellipsoid(a), r)
    s = math.sqrt(np.sum(np.minimum(a * a, r * r)))
    assert s / math.sqrt(3) - 1e-9 <= lw.upper and lw.lower <= math.sqrt(2) * s + 1e-9
    assert lw.lower <= lw.value <= lw.upper


def test_local_width_l1_ball_large_radius():
    alpha = 1.5
    spec = S.L1Ball(alpha, 6)
    lw = local_width(spec, 2 * alpha, cfg=MCConfig(samples=20_000, seed=3))
    w = gaussian_width_mc(spec, MCConfig(samples=20_000, seed=4))
    assert abs(lw.value - w.value) <= K_SE * math.hypot(lw.se, w.se) + 1e-9


@given(arrays(float, (6, 4), elements=st.floats(-3, 3, allow_nan=False)),
       st.floats(0.1, 3), st.floats(0.05, 3))
def test_l1_ball_support_exact_matches_golden(X, alpha, r):
    a = l1_ball_ball_support(X, alpha, r, method="exact")
    b = l1_ball_ball_support(X, alpha, r, method="golden")
    np.testing.assert_allclose(a, b, atol=1e-7, rtol=1e-7)
    # the intersection is inside both bodies
    assert np.all(a <= alpha * np.abs(X).max(axis=1) + 1e-9)
    assert np.all(a <= r * np.linalg.norm(X, axis=1) + 1e-9)


# -------------------------------------------------------------- coverings

def test_cover_pack_examples():
    P = np.array([[0.0, 0.0], [10.0, 0.0]])
    cp = covering_packing(P, 1.0)
    assert (cp.n_cover, cp.n_pack) == (2, 2)
    assert covering_packing(P, 10.0).n_cover == 1


def test_hundred_points_in_square():
    P = np.random.default_rng(0).uniform(size=(100, 2))
    assert covering_packing(P, 0.5).n_cover <= 4


def test_covering_ellipsoid_examples():
    assert covering_ellipsoid_bounds([4, 1], 1.0)[0] == pytest.approx(math.log(4))
    assert covering_ellipsoid_bounds([0.5, 0.3], 1.0)[0] == 0.0
    assert covering_ellipsoid_bounds([8, 8], 1.0)[0] == pytest.approx(2 * math.log(8))


def test_covering_ellipsoid_against_dense_sample():
    eps, r = 0.25, 1.0
    Q = dense_sample(S.Ellipsoid([8, 8]), eps)
    cp = covering_packing(Q, r, eps)
    lo_r, hi_r = covering_ellipsoid_bounds([8, 8], r)
    lo_re, _ = covering_ellipsoid_bounds([8, 8], r + eps)
    # n_pack_2r <= N(E, r) <= exp(hi);  n_cover >= N(E, r + eps) >= exp(lo(r + eps))
    assert math.log(cp.n_pack_2r) <= hi_r
    assert math.log(cp.n_cover) >= lo_re


@given(st.integers(0, 5000), st.floats(0.1, 2.0))
def test_packing_covering_sandwich(seed, r):
    P = np.random.default_rng(seed).standard_normal((40, 2))
    cp = covering_packing(P, r)
    assert cp.n_pack_2r <= cp.n_cover <= cp.n_pack


@given(st.integers(0, 5000))
def test_exact_cover_counts_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((7, 2))
    spec = S.FinitePoints(P)
    prof = complexity_profile(spec, MCConfig(samples=500, seed=0))
    for r, lo, hi in zip(prof.radii[::8], prof.logN_lower[::8], prof.logN_upper[::8]):
        n = brute_cover(P, r)
        assert lo == pytest.approx(math.log(n)) and hi == pytest.approx(math.log(n))


def test_gonzalez_radii_non_increasing():
    P = np.random.default_rng(5).standard_normal((60, 3))
    _, radii = gonzalez(P)
    assert np.all(np.diff(radii[1:]) <= 1e-12)


# ---------------------------------------------------------- fixed points

def test_phi_step_simple():
    # g = 4 on [0, 1), 0.5 on [1, inf): sup{r : g >= r^2} = 1
    assert phi_step(np.array([0.0, 1.0, np.inf]), np.array([4.0, 0.5])) == pytest.approx(1.0)


@pytest.mark.parametrize("t", [0.02, 0.1, 1 / (2 * math.pi)])
def test_two_point_r_star_below_switch(t):
    prof = complexity_profile(S.FinitePoints([[0.0], [SQ2PI * t]]))
    assert prof.r_star[0] ** 2 == pytest.approx(t) and prof.r_star[1] ** 2 == pytest.approx(t)


@pytest.mark.parametrize("t", [0.2, 0.5, 3.0])
def test_two_point_r_star_above_switch(t):
    prof = complexity_profile(S.FinitePoints([[0.0], [SQ2PI * t]]))
    assert prof.r_star == (0.0, 0.0)


def test_far_pair_r_tilde_and_inf_form():
    prof = complexity_profile(S.FinitePoints([[0.0], [10.0]]))
    assert prof.r_tilde[0] == pytest.approx(math.sqrt(math.log(2)))
    assert prof.r_tilde[1] == pytest.approx(math.sqrt(math.log(2)))
    assert math.log(2) - 1e-12 <= prof.inf_red_form[0] <= prof.inf_red_form[1] <= 2 * math.log(2) + 1e-12


def test_point_profile_is_zero():
    prof = complexity_profile(S.Point([0.0, 0.0]))
    assert prof.r_star == (0.0, 0.0) and prof.r_tilde == (0.0, 0.0)
    assert prof.inf_regret_form == (0.0, 0.0) and prof.inf_red_form == (0.0, 0.0)


def test_ellipsoid_fixed_point_inf_sandwich():
    prof = complexity_profile(S.Ellipsoid(1.0 / np.arange(1, 9)))
    rt_lo, rt_hi = prof.r_tilde
    red_lo, red_hi = prof.inf_red_form
    # phi(g)^2 <= inf{g + r^2} <= 2 phi(g)^2 for non-increasing g = log N
    assert rt_lo ** 2 <= red_hi + 1e-9
    assert red_lo <= 2 * rt_hi ** 2 + 1e-9


def test_entropy_numbers_are_monotone():
    prof = complexity_profile(S.FinitePoints(np.random.default_rng(2).standard_normal((20, 2))))
    e = entropy_numbers(prof, 5)
    his = [hi for _, _, hi in e]
    assert all(lo <= hi for _, lo, hi in e)
    assert np.all(np.diff(his) <= 0)


# ------------------------------------------------------------ invariants

specs = st.one_of(
    st.integers(0, 10_000).map(lambda s: S.FinitePoints(np.random.default_rng(s).standard_normal((8, 2)))),
    st.lists(st.floats(0.1, 3), min_size=2, max_size=4).map(lambda a: S.Ellipsoid(sorted(a, reverse=True))),
    st.floats(0.2, 3).map(lambda r: S.Ball(np.zeros(3), r)),
)


@given(specs)
def test_profile_invariants(spec):
    prof = complexity_profile(spec, MCConfig(samples=2000, seed=1))
    assert np.all(np.diff(prof.local_width_lo) >= -1e-12)
    assert np.all(np.diff(prof.local_width_hi) >= -1e-12)
    assert np.all(prof.logN_lower <= prof.logN_upper + 1e-12)
    assert np.all(np.diff(prof.logN_upper) <= 1e-12)
    w_hi = prof.width[1]
    assert prof.r_star[0] <= min(math.sqrt(w_hi), math.sqrt(spec.dim)) + 1e-9
    assert prof.r_tilde[1] <= prof.diam + 1e-9
    if spec.is_convex and spec.is_symmetric:
        # w_A(r) / r is non-increasing: compare hi at r with lo at a larger r
        ratio_hi, ratio_lo = prof.local_width_hi / prof.radii, prof.local_width_lo / prof.radii
        assert np.all(ratio_lo[1:] <= ratio_hi[:-1] + 1e-9)


@given(st.lists(st.floats(0.2, 3), min_size=2, max_size=4), st.floats(1.0, 4.0))
def test_fixed_point_scaling(axes, lam):
    a = np.array(sorted(axes, reverse=True))
    cfg = MCConfig(samples=2000, seed=0)
    base = complexity_profile(S.Ellipsoid(a), cfg)
    big = complexity_profile(S.Scale(lam, S.Ellipsoid(a)), cfg)
    # w_{lam A}(r) = lam w_A(r / lam) >= w_A(r), and phi(lam g(./lam)) <= lam^2 phi(g)
    assert big.r_star[1] >= base.r_star[0] - 1e-9
    assert big.r_star[0] <= lam ** 2 * base.r_star[1] + 1e-9
