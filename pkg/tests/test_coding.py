import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate
from scipy.stats import norm

from gaussregret import sets as S
from gaussregret.coding import (
    NML, Gaussian, GaussianDensity, NetMixture, NotSequential, best_tilde_q_redundancy,
    choose_lambda, finite_capacity_mc, kl, kl_point, log_density, mutual_information_mc,
    redundancy_bounds, regret_on_sequence, ridge_bound, ridge_identity, ridge_predictor,
    sequential_predict, tilde_q, tilde_q_redundancy, two_point_redundancy, two_point_tv,
)
from gaussregret.estimate import MCConfig
from gaussregret.regret import regret, regret_exact, two_point_regret

LOG_2PI = math.log(2 * math.pi)


# ------------------------------------------------------------ densities

def test_log_density_examples():
    assert log_density(Gaussian(GaussianDensity([0.0], [1.0])), [0.0]) == pytest.approx(-0.5 * LOG_2PI)
    nml = NML.over(S.Point([0.5, -1.0]))
    y = np.array([1.0, 2.0])
    expect = -LOG_2PI - 0.5 * np.sum((y - [0.5, -1.0]) ** 2)
    assert log_density(nml, y) == pytest.approx(expect)


def test_log_density_nml_far_pair():
    nml = NML.over(S.FinitePoints([[0.0], [10.0]]))
    # normalizer oracle: 1-d quadrature of exp(-dist^2/2) / sqrt(2 pi)
    f = lambda y: math.exp(-0.5 * min(y * y, (y - 10) ** 2)) / math.sqrt(2 * math.pi)
    Z = sum(integrate.quad(f, a, b, epsabs=1e-13)[0] for a, b in ((-40, 5), (5, 50)))
    assert log_density(nml, [0.0]) == pytest.approx(-0.5 * LOG_2PI - math.log(Z), abs=1e-9)
    assert math.log(Z) == pytest.approx(math.log(2), abs=1e-6)


def test_density_validation():
    with pytest.raises(ValueError):
        GaussianDensity([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        ridge_predictor([1.0], 0.0)
    with pytest.raises(S.DimensionMismatch):
        log_density(Gaussian(GaussianDensity([0.0], [1.0])), [0.0, 1.0])
    with pytest.raises(ValueError):
        NetMixture(S.FinitePoints([[0.0], [1.0]]), np.array([0.7, 0.7]))


# -------------------------------------------------------- tensorization

def test_tensorization_two_by_two():
    Sig = np.array([[2.0, 1.0], [1.0, 2.0]])
    g = Gaussian(GaussianDensity([0.0, 0.0], Sig))
    y = np.array([1.0, 1.0])
    rec = sequential_predict(g, y)
    # direct algebra: y1 ~ N(0, 2); y2 | y1 ~ N(y1 / 2, 3 / 2)
    step1 = -norm.logpdf(1.0, 0.0, math.sqrt(2.0))
    step2 = -norm.logpdf(1.0, 0.5, math.sqrt(1.5))
    np.testing.assert_allclose(rec.per_step_loss, [step1, step2], rtol=1e-12)
    joint = LOG_2PI + 0.5 * math.log(3.0) + 0.5 * y @ np.linalg.solve(Sig, y)
    assert rec.cumulative == pytest.approx(joint, abs=1e-12)


def test_diagonal_gaussian_steps_are_marginals():
    cov = np.array([1.0, 4.0, 0.25])
    y = np.array([0.3, -1.0, 2.0])
    rec = sequential_predict(Gaussian(GaussianDensity(np.zeros(3), cov)), y)
    np.testing.assert_allclose(rec.per_step_loss, -norm.logpdf(y, 0.0, np.sqrt(cov)), rtol=1e-12)


def test_net_mixture_posterior_concentrates():
    mix = NetMixture(S.FinitePoints([[0.0, 0.0, 0.0], [20.0, 20.0, 20.0]]))
    rec = sequential_predict(mix, [19.5, 20.3, 20.1])
    assert rec.posterior[1] == pytest.approx(1.0, abs=1e-12)
    assert rec.cumulative == pytest.approx(-log_density(mix, [19.5, 20.3, 20.1]), abs=1e-9)


def test_nml_is_joint_only():
    nml = NML.over(S.Point([0.0]))
    with pytest.raises(NotSequential):
        sequential_predict(nml, [1.0])
    rec = regret_on_sequence(nml, S.Point([0.0]), [1.0])
    assert "joint_only" in rec.flags and rec.regret == pytest.approx(0.0, abs=1e-12)


def _spd(rng, n):
    M = rng.standard_normal((n, n))
    return M @ M.T + 0.3 * np.eye(n)


@given(st.integers(0, 100_000), st.integers(1, 8))
def test_tensorization_random_gaussians(seed, n):
    rng = np.random.default_rng(seed)
    g = Gaussian(GaussianDensity(rng.standard_normal(n), _spd(rng, n)))
    y = 3 * rng.standard_normal(n)
    rec = sequential_predict(g, y)
    assert rec.cumulative == pytest.approx(-log_density(g, y), abs=1e-9 * max(1.0, rec.cumulative))


@given(st.integers(0, 100_000))
def test_tensorization_random_mixtures(seed):
    rng = np.random.default_rng(seed)
    k, n = rng.integers(1, 6), rng.integers(1, 6)
    w = rng.dirichlet(np.ones(k))
    mix = NetMixture(S.FinitePoints(3 * rng.standard_normal((k, n))), w)
    y = 3 * rng.standard_normal(n)
    rec = sequential_predict(mix, y)
    assert rec.cumulative == pytest.approx(-log_density(mix, y), abs=1e-9 * max(1.0, rec.cumulative))


# ------------------------------------------------------ per-sequence regret

def test_nml_equalizes_regret():
    A = S.Ball([0.0, 0.0], 1.3)
    nml = NML.over(A)
    rng = np.random.default_rng(0)
    vals = np.array([regret_on_sequence(nml, A, 4 * rng.standard_normal(2)).regret for _ in range(100)])
    assert np.ptp(vals) <= 1e-9
    assert vals[0] == pytest.approx(regret_exact(A).value, abs=1e-12)


def test_oracle_predictor_has_zero_regret():
    theta = np.array([1.0, -2.0])
    rec = regret_on_sequence(Gaussian(GaussianDensity(theta, 1.0)), S.Point(theta), [0.4, 0.1])
    assert rec.regret == pytest.approx(0.0, abs=1e-12)


def test_ridge_regret_within_bound():
    a = np.array([3.0, 1.0, 0.5])
    lam, bound = choose_lambda(a)
    q = ridge_predictor(a, lam)
    E = S.Ellipsoid(a)
    rng = np.random.default_rng(4)
    for _ in range(50):
        y = 5 * rng.standard_normal(3)
        assert regret_on_sequence(q, E, y).regret <= bound + 1e-9


# --------------------------------------------------------------- ridge

def test_ridge_identity_scalar_example():
    lhs, rhs = ridge_identity([1.0], 1.0, [2.0])
    assert lhs == pytest.approx(0.5 * math.log(2)) and rhs == pytest.approx(0.5 * math.log(2))


def test_ridge_identity_large_lambda():
    lhs, rhs = ridge_identity([1.0, 2.0], 1e12, [0.3, -0.7])
    assert abs(lhs) < 1e-9 and abs(rhs) < 1e-9


@given(st.integers(0, 100_000))
def test_ridge_identity_random(seed):
    rng = np.random.default_rng(seed)
    n = 6
    a = rng.uniform(0.05, 5, n)
    lam = math.exp(rng.uniform(-4, 4))
    lhs, rhs = ridge_identity(a, lam, 4 * rng.standard_normal(n))
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_choose_lambda_interior_minimum():
    lam, bound = choose_lambda([1.0])
    grid = np.geomspace(1e-4, 10, 2001)
    vals = [ridge_bound([1.0], x) for x in grid]
    i = int(np.argmin(vals))
    assert 0 < i < grid.size - 1
    assert lam == pytest.approx(grid[i], rel=1e-2) and bound <= vals[i] + 1e-12


def test_choose_lambda_small_axes():
    lam, bound = choose_lambda([1e-4])
    assert lam < 1e-3 and bound < 1e-3


def test_choose_lambda_within_ridge_factor():
    a = np.full(5, 10.0)
    _, bound = choose_lambda(a)
    r = regret_exact(S.Ellipsoid(a)).value
    assert r <= bound <= 3000 * r


# ------------------------------------------------------------------ KL

def test_kl_examples():
    assert kl([1.0, 2.0], GaussianDensity([1.0, 2.0], 1.0)) == pytest.approx(0.0, abs=1e-15)
    assert kl([0.0], GaussianDensity([2.0], 1.0)) == pytest.approx(2.0)
    expect = 0.5 * (math.log(2) - 1 + 0.5)
    q = GaussianDensity([0.0], [2.0])
    assert kl([0.0], q) == pytest.approx(expect)
    f = lambda y: norm.pdf(y) * (norm.logpdf(y) - norm.logpdf(y, 0, math.sqrt(2)))
    assert integrate.quad(f, -np.inf, np.inf)[0] == pytest.approx(expect, abs=1e-6)


@given(st.integers(0, 100_000), st.integers(1, 5))
def test_kl_full_matches_diagonal_rotation(seed, n):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = rng.uniform(0.2, 4, n)
    theta = rng.standard_normal(n)
    full = GaussianDensity(np.zeros(n), Q @ np.diag(d) @ Q.T)
    diag = GaussianDensity(np.zeros(n), d)
    # KL is invariant under a common rotation of both arguments
    assert kl_point(theta, full) == pytest.approx(kl_point(Q.T @ theta, diag), rel=1e-9, abs=1e-12)


def test_kl_rejects_non_unit_p():
    with pytest.raises(ValueError):
        kl(GaussianDensity([0.0], [2.0]), GaussianDensity([0.0], [1.0]))


# ------------------------------------------------------------- tilde q

def test_tilde_q_huge_lambda_is_standard_normal():
    a = np.array([3.0, 1.0, 0.5])
    q = tilde_q(a, 1e9)
    np.testing.assert_allclose(q.cov, 1.0)
    assert tilde_q_redundancy(a, 1e9) == pytest.approx(0.5 * 9.0)


def test_tilde_q_against_proof_bound():
    a = np.array([4.0, 1.0])
    bound = 0.5 * math.log1p(16.0) + 2.0
    assert tilde_q_redundancy(a, 1.0) <= bound


def test_tilde_q_sup_dominates_boundary_samples():
    rng = np.random.default_rng(3)
    a = np.sort(rng.uniform(0.2, 4, 4))[::-1]
    lam = 0.5
    q = tilde_q(a, lam)
    U = rng.standard_normal((10_000, 4))
    Th = a * U / np.linalg.norm(U, axis=1, keepdims=True)
    mc = max(kl_point(t, q) for t in Th)
    exact = tilde_q_redundancy(a, lam)
    assert exact >= mc - 1e-12
    assert exact - mc <= 0.05 * exact


def test_best_tilde_q_is_minimum_over_grid():
    a = 2.0 ** -np.arange(1, 9)
    lam, v = best_tilde_q_redundancy(a)
    assert v == pytest.approx(tilde_q_redundancy(a, lam))
    assert v <= tilde_q_redundancy(a, 1.0) + 1e-12


# ------------------------------------------------------------ redundancy

def test_redundancy_point_is_zero():
    b = redundancy_bounds(S.Point([1.0, 2.0]))
    assert (b.lower, b.upper) == (0.0, 0.0)


def _two_point_oracle(rho):
    # KL(p_0 || (p_0 + p_rho)/2) by quadrature of the density ratio
    f = lambda y: norm.pdf(y) * (norm.logpdf(y) - np.logaddexp(norm.logpdf(y), norm.logpdf(y, rho)) + math.log(2))
    return integrate.quad(f, -40, 40 + rho, epsabs=1e-13, limit=200)[0]


@pytest.mark.parametrize("rho", [0.5, 2.0, 8.0])
def test_two_point_redundancy_against_oracle(rho):
    exact = _two_point_oracle(rho)
    assert two_point_redundancy(rho).value == pytest.approx(exact, abs=1e-9)
    b = redundancy_bounds(S.FinitePoints([[0.0], [rho]]))
    assert b.lower - 1e-6 <= exact <= b.upper + 1e-6


def test_two_point_rho_two_pinsker_and_net():
    tau = 2 * integrate.quad(norm.pdf, 0, 1)[0]
    assert two_point_tv(2.0) == pytest.approx(tau)
    b = redundancy_bounds(S.FinitePoints([[0.0], [2.0]]))
    assert b.lower >= 0.5 * tau * tau - 1e-12
    assert b.upper <= math.log(2) + 2.0


def test_redundancy_below_regret_two_points():
    for rho in (0.3, 1.5, 5.0):
        assert two_point_redundancy(rho).value <= two_point_regret(rho)


def test_ellipsoid_redundancy_spread():
    b = redundancy_bounds(S.Ellipsoid(2.0 ** -np.arange(1, 9)))
    assert 0 < b.lower <= b.upper <= 600 * 5 * b.lower


def test_capacity_bracket_contains_two_point_value():
    P = np.array([[0.0, 0.0], [2.0, 0.0]])
    lo, hi, w = finite_capacity_mc(P, MCConfig(samples=40_000, seed=3))
    assert lo <= two_point_redundancy(2.0).value <= hi
    np.testing.assert_allclose(w, 0.5, atol=0.05)


def test_capacity_bracket_brackets_uniform_mutual_information():
    P = np.random.default_rng(6).standard_normal((12, 3))
    lo, hi, _ = finite_capacity_mc(P, MCConfig(samples=40_000, seed=1))
    mi, se = mutual_information_mc(P, MCConfig(samples=40_000, seed=2))
    # capacity is at least the uniform-prior information, at most log k
    assert mi - 4 * se <= hi and lo <= math.log(12)
    assert lo <= hi


@given(st.integers(0, 10_000))
def test_redundancy_lower_below_regret(seed):
    rng = np.random.default_rng(seed)
    spec = S.FinitePoints(rng.standard_normal((int(rng.integers(3, 8)), 2)))
    b = redundancy_bounds(spec, MCConfig(samples=8000, seed=seed))
    r = regret(spec)
    assert b.lower <= r.value + r.half_width + 1e-9
