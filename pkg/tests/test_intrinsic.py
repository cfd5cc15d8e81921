import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import K_SE
from gaussregret import sets as S
from gaussregret.complexity import ball_width
from gaussregret.intrinsic import (
    IntrinsicVolumeSeq, ball_volumes, box_volumes, exact_volumes, kappa_table,
    log_concavity_slack, max_intrinsic_bounds, mc_kubota, mc_tsirelson, regret_from_volumes,
    rissanen_report, segment_volumes, steiner_parallel_volume,
)

SQ2PI = math.sqrt(2 * math.pi)


def _parallel_area_grid(sides, r, h=2e-3):
    """Area of {x : dist(box, x) <= r} by counting grid cells (2-d oracle)."""
    box = S.Box([0.0, 0.0], sides)
    xs = np.arange(-r - h, sides[0] + r + h, h) + h / 2
    ys = np.arange(-r - h, sides[1] + r + h, h) + h / 2
    X = np.stack(np.meshgrid(xs, ys), -1).reshape(-1, 2)
    return float(np.count_nonzero(S.dist(box, X) <= r)) * h * h


def _steiner_fit(areas, rs, n):
    # vol(K + rB) = sum_j V_{n-j} kappa_j r^j  ->  read V off the polynomial coefficients
    coef = np.polyfit(rs, areas, n)[::-1]
    return coef[::-1] / kappa_table(n)[::-1]


# ------------------------------------------------------- exact sequences

def test_disc_volumes_match_steiner_expansion():
    rs = np.linspace(0.0, 2.0, 7)
    areas = math.pi * (1.0 + rs) ** 2
    np.testing.assert_allclose(ball_volumes(2, 1.0).values, _steiner_fit(areas, rs, 2), rtol=1e-10)
    np.testing.assert_allclose(ball_volumes(2, 1.0).values, [1, math.pi, math.pi])


def test_ball_volumes_low_dimensions():
    # the 1-ball of radius r is an interval of length 2r
    np.testing.assert_allclose(ball_volumes(1, 2.5).values, [1.0, 5.0])
    np.testing.assert_allclose(ball_volumes(1, 2.5).values, segment_volumes(5.0, 1).values)
    assert ball_volumes(3, 1.0).values[2] == pytest.approx(2 * math.pi)   # half of 4 pi


def test_unit_square_volumes_from_parallel_areas():
    rs = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    areas = [_parallel_area_grid([1.0, 1.0], r) for r in rs]
    fit = _steiner_fit(np.array(areas), rs, 2)
    np.testing.assert_allclose(fit, [1, 2, 1], rtol=1e-2, atol=1e-2)
    np.testing.assert_allclose(box_volumes([1, 1]).values, [1, 2, 1])


def test_box_2x3_against_grid():
    v = box_volumes([2, 3]).values
    assert tuple(v) == (1.0, 5.0, 6.0)
    r = 0.5
    assert steiner_parallel_volume(box_volumes([2, 3]), r) == pytest.approx(
        _parallel_area_grid([2.0, 3.0], r), rel=1e-2)


def test_one_dimensional_box():
    np.testing.assert_allclose(box_volumes([3.5]).values, [1, 3.5])


def test_steiner_examples():
    sq = box_volumes([1, 1])
    assert steiner_parallel_volume(sq, 1.0) == pytest.approx(5 + math.pi)
    assert steiner_parallel_volume(sq, 0.0) == pytest.approx(1.0)
    assert steiner_parallel_volume(segment_volumes(2.0, 1), 0.3) == pytest.approx(2.6)


def test_regret_from_volumes_examples():
    assert regret_from_volumes(segment_volumes(SQ2PI, 1)).value == pytest.approx(math.log(2))
    assert regret_from_volumes(box_volumes([SQ2PI, SQ2PI])).value == pytest.approx(math.log(4))


def test_regret_from_volumes_small_scale_slope_is_width():
    seq = ball_volumes(5, 1.0)
    t = 1e-6
    assert regret_from_volumes(seq, t).value / t == pytest.approx(ball_width(5), rel=1e-5)


def test_exact_volumes_through_wrappers():
    spec = S.Scale(2.0, S.Translate([1.0, 1.0], S.Product((S.Box([0], [1]), S.Box([0], [3])))))
    np.testing.assert_allclose(exact_volumes(spec).values, box_volumes([2, 6]).values)


def test_sequence_validation():
    with pytest.raises(ValueError):
        IntrinsicVolumeSeq(np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        IntrinsicVolumeSeq(np.array([1.0, 0.1, 5.0]))   # breaks log-concavity


# --------------------------------------------------------- Monte Carlo

def test_tsirelson_round_ellipsoid_matches_ball():
    est = mc_tsirelson(S.Ellipsoid([1.3, 1.3, 1.3]), 3, samples=4000, seed=1)
    expect = ball_volumes(3, 1.3).values[3] * SQ2PI ** -3
    assert abs(est.value - expect) <= K_SE * est.se


def test_tsirelson_box_hull_area():
    V = np.array([[0, 0], [2, 0], [0, 3], [2, 3]], float)
    est = mc_tsirelson(S.ConvexHull(V), 2, samples=4000, seed=2)
    assert abs(est.value - 6.0 / (2 * math.pi)) <= K_SE * est.se


def test_tsirelson_ellipsoid_width_bracket():
    est = mc_tsirelson(S.Ellipsoid([2, 1]), 1, samples=4000, seed=3)
    assert math.sqrt(5 / 3) - K_SE * est.se <= est.value <= math.sqrt(5) + K_SE * est.se


def test_kubota_unit_square_first_volume():
    est = mc_kubota(S.Box([0, 0], [1, 1]), 1, samples=20_000, seed=4)
    assert abs(est.value - 2.0) <= K_SE * est.se


def test_tsirelson_rotation_invariance(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    E = S.Ellipsoid([2.0, 1.0, 0.5])
    a = mc_tsirelson(E, 2, samples=3000, seed=5)
    b = mc_tsirelson(E, 2, samples=3000, seed=6, rotation=Q)
    assert abs(a.value - b.value) <= K_SE * math.hypot(a.se, b.se)


# ------------------------------------------------------ max-term, Rissanen

def test_max_term_sandwich_ball_n20():
    w = ball_width(20)
    t = 2.5 / w                     # first volume of tB/sqrt(2 pi) equals t w = 2.5
    mb = max_intrinsic_bounds(ball_volumes(20), t)
    assert mb.applicable and mb.holds


def test_max_term_sandwich_square():
    mb = max_intrinsic_bounds(box_volumes([4 * SQ2PI, 4 * SQ2PI]))
    assert mb.applicable and mb.argmax == 2 and mb.holds


def test_max_term_not_applicable_below_two():
    mb = max_intrinsic_bounds(box_volumes([1.0, 1.0]))
    assert not mb.applicable and mb.notes


def test_rissanen_dominant_index_square():
    seq = box_volumes([1.0, 1.0])
    # V_2 t^2 >= V_1 t with t = sqrt(n / 2 pi) iff t >= 2 iff n >= 8 pi
    assert rissanen_report(seq, 1)["dominant_index"] == 1
    assert rissanen_report(seq, 26)["dominant_index"] == 2
    assert rissanen_report(seq, 25)["dominant_index"] == 1
    rep = rissanen_report(seq, 26)
    assert rep["direct_condition_holds"] == (rep["dominant_index"] == 2)


def test_rissanen_segment_never_switches():
    seq = segment_volumes(1.0, 2)
    for n in (1, 100, 10**6):
        assert rissanen_report(seq, n)["dominant_index"] == 1


# ------------------------------------------------------------ properties

@given(st.integers(1, 20), st.floats(0.05, 20))
def test_ball_sequences_log_concave(n, r):
    v = ball_volumes(n, r).values
    assert np.all(log_concavity_slack(v) >= -1e-9)


@given(st.lists(st.floats(0.05, 20), min_size=1, max_size=20))
def test_box_sequences_log_concave(sides):
    v = box_volumes(sides).values
    assert np.all(log_concavity_slack(v) >= -1e-9)


@given(st.lists(st.floats(0.1, 5), min_size=1, max_size=4),
       st.integers(1, 4), st.floats(0.1, 3), st.floats(0.1, 4))
def test_product_rule_and_additivity(sides, n, r, t):
    A, B = box_volumes(sides), ball_volumes(n, r)
    AB = exact_volumes(S.Product((S.Box(np.zeros(len(sides)), sides), S.Ball(np.zeros(n), r))))
    np.testing.assert_allclose(AB.values, np.convolve(A.values, B.values), rtol=1e-12)
    lhs = regret_from_volumes(AB, t).value
    rhs = regret_from_volumes(A, t).value + regret_from_volumes(B, t).value
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(lhs)))
