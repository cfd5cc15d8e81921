import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaussregret import sets as S

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
pos = st.floats(0.1, 5, allow_nan=False, allow_infinity=False)


# ------------------------------------------------------------- examples

def test_dist_examples():
    assert S.dist(S.Ball([0, 0], 1), [3, 0]) == pytest.approx(2.0)
    assert S.dist(S.Ellipsoid([2, 1]), [0, 2]) == pytest.approx(1.0)


def test_dist_product_of_intervals_matches_grid():
    sq = S.Product((S.Box([0], [1]), S.Box([0], [1])))
    # brute force over a 1e-4 grid of the unit square: the corner (1, 1) is nearest
    g = np.linspace(0, 1, 10_001)
    brute = math.sqrt(np.min((2 - g) ** 2) * 2)
    assert S.dist(sq, [2, 2]) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert abs(S.dist(sq, [2, 2]) - brute) < 1e-4


def test_support_examples():
    assert S.support(S.L1Ball(2, 3), [1, -3, 2]) == pytest.approx(6.0)
    assert S.support(S.Ellipsoid([3, 4]), [1, 0]) == pytest.approx(3.0)
    V = np.array([[0, 0], [1, 0], [0, 1]], float)
    assert S.support(S.ConvexHull(V), [2, 3]) == pytest.approx(max(V @ [2, 3]))


def test_sup_quadratic_examples():
    assert S.sup_quadratic(S.Point([0.0, 0.0]), [1.3, -2]) == pytest.approx(0.0)
    assert S.sup_quadratic(S.Ball([0], 1), [3]) == pytest.approx(2.5)


def test_sup_quadratic_two_routes_agree_on_two_points():
    A = S.FinitePoints([[0.0], [2.0]])
    enumerated = max(th * 1.0 - th * th / 2 for th in (0.0, 2.0))
    via_dist = (1.0 - S.dist2(A, [[1.0]])[0]) / 2
    assert enumerated == pytest.approx(0.0)
    assert via_dist == pytest.approx(enumerated)
    assert S.sup_quadratic(A, [1.0]) == pytest.approx(enumerated)


def test_diameter_examples():
    assert S.diameter(S.Ellipsoid([2, 1])) == pytest.approx(4.0)
    assert S.diameter(S.Box([0, 0], [1, 1])) == pytest.approx(math.sqrt(2))
    P = [[0, 0], [3, 0], [0, 5]]
    assert S.diameter(S.FinitePoints(P)) == pytest.approx(math.sqrt(34))


def test_project_onto_ball():
    np.testing.assert_allclose(S.project(S.Ball([0, 0], 1), [3, 4]), [0.6, 0.8])


# ----------------------------------------------------------- validation

@pytest.mark.parametrize("bad", [
    lambda: S.Ellipsoid([1, 0]),
    lambda: S.Ball([0, 0], -1),
    lambda: S.Box([0], [0]),
    lambda: S.FinitePoints([[0, 0], [1]]),
    lambda: S.Point([np.inf]),
    lambda: S.Scale(-1.0, S.Point([0.0])),
])
def test_constructors_reject_bad_input(bad):
    with pytest.raises(S.SetSpecError):
        bad()


def test_dimension_mismatch_in_union():
    with pytest.raises(S.SetSpecError):
        S.Union((S.Point([0.0]), S.Point([0.0, 1.0])))


def test_flags_are_sound():
    assert S.Ball([0, 0], 1).is_convex and S.Ball([0, 0], 1).is_symmetric
    assert not S.FinitePoints([[0.0], [1.0]]).is_convex
    # a union of two convex bodies is not provably convex
    u = S.Union((S.Ball([0.0], 1), S.Ball([5.0], 1)))
    assert not u.is_convex


def test_json_round_trip_nested():
    spec = S.Scale(2.0, S.Translate([1.0, -1.0], S.Product((S.Box([0], [1]), S.Ellipsoid([3.0])))))
    back = S.loads_spec(S.dumps_spec(spec))
    assert S.dumps_spec(back) == S.dumps_spec(spec)
    x = np.array([[4.0, 7.0], [-1.0, 0.5]])
    np.testing.assert_allclose(S.dist(back, x), S.dist(spec, x))


def test_parse_error_names_line_and_field():
    text = '{"type": "ellipsoid",\n "axes": [3, -1]}'
    with pytest.raises(S.SpecParseError) as info:
        S.loads_spec(text)
    assert info.value.line == 2
    assert info.value.path == "$.axes"


def test_parse_error_unknown_type_and_missing_field():
    with pytest.raises(S.SpecParseError, match="unknown set type"):
        S.loads_spec('{"type": "blob"}')
    with pytest.raises(S.SpecParseError, match="missing field 'radius'"):
        S.loads_spec('{"type": "ball", "center": [0]}')
    with pytest.raises(S.SpecParseError):
        S.loads_spec('{"type": "ball",')


def test_as_points():
    P = np.array([[0.0, 0.0], [1.0, 2.0]])
    np.testing.assert_allclose(S.as_points(S.FinitePoints(P)), P)
    assert S.as_points(S.Ball([0.0], 1.0)) is None
    sums = S.as_points(S.MinkowskiSum((S.FinitePoints([[0.0], [1.0]]), S.FinitePoints([[0.0], [1.0]]))))
    np.testing.assert_allclose(np.sort(sums[:, 0]), [0.0, 1.0, 2.0])


# ------------------------------------------------------------ properties

def _convex_specs():
    return st.one_of(
        st.builds(lambda c, r: S.Ball(c, r), arrays(float, 2, elements=finite), pos),
        st.builds(lambda a: S.Ellipsoid(sorted(a, reverse=True)), st.lists(pos, min_size=2, max_size=2)),
        st.builds(lambda c, s: S.Box(c, s), arrays(float, 2, elements=finite), arrays(float, 2, elements=pos)),
        st.builds(lambda al: S.L1Ball(al, 2), pos),
        st.builds(lambda P: S.ConvexHull(P), arrays(float, (5, 2), elements=finite)),
    )


def _specs():
    return st.one_of(
        _convex_specs(),
        st.builds(lambda P: S.FinitePoints(P), arrays(float, (4, 2), elements=finite)),
        st.builds(lambda P, Q: S.Union((S.FinitePoints(P), S.Ball(Q, 1.0))),
                  arrays(float, (3, 2), elements=finite), arrays(float, 2, elements=finite)),
    )


vec2 = arrays(float, 2, elements=st.floats(-10, 10, allow_nan=False))


@given(_specs(), vec2, vec2)
def test_dist_is_one_lipschitz(spec, x, y):
    dx, dy = S.dist(spec, x), S.dist(spec, y)
    assert abs(dx - dy) <= np.linalg.norm(x - y) + 1e-7


@given(_specs(), vec2)
def test_projection_is_a_member_at_distance_dist(spec, x):
    p = S.project(spec, x)
    assert S.dist(spec, p) <= 1e-6
    assert np.linalg.norm(x - p) == pytest.approx(S.dist(spec, x), abs=1e-6)


@given(_convex_specs(), vec2)
def test_sup_quadratic_matches_distance_form(spec, x):
    expect = (x @ x - S.dist2(spec, x[None, :])[0]) / 2
    assert S.sup_quadratic(spec, x) == pytest.approx(expect, abs=1e-8 * max(1.0, abs(expect)))


@given(_convex_specs(), vec2)
def test_support_dominates_projected_point(spec, x):
    # h_K(x) >= <p, x> for every member p, with equality approached by the projection
    p = S.project(spec, 100.0 * x)
    assert S.support(spec, x) >= float(p @ x) - 1e-6


@given(_specs(), vec2, st.floats(0.2, 5), vec2)
def test_scale_and_translate_equivariance(spec, x, t, v):
    assert S.dist(S.Scale(t, spec), t * x) == pytest.approx(t * S.dist(spec, x), rel=1e-7, abs=1e-7)
    assert S.dist(S.Translate(v, spec), x + v) == pytest.approx(S.dist(spec, x), rel=1e-7, abs=1e-7)


@given(_specs())
def test_membership_matches_zero_distance_on_grid(spec):
    g = np.linspace(-6, 6, 25)
    X = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
    d = S.dist(spec, X)
    inside = S.contains(spec, X)
    assert np.all(inside == (d <= 1e-10))


@given(st.lists(pos, min_size=2, max_size=5), st.data())
def test_ellipsoid_projection_residuals(axes, data):
    a = np.array(sorted(axes, reverse=True))
    n = a.size
    y = data.draw(arrays(float, n, elements=st.floats(-20, 20, allow_nan=False)))
    if np.sum((y / a) ** 2) <= 1.05:
        y = y + np.sign(y + 1e-3) * a * 1.5   # push outside
    foot, mu = S.project_ellipsoid(a, y[None, :])
    p = foot[0]
    assert abs(np.sum((p / a) ** 2) - 1.0) <= 1e-10
    r, g = y - p, p / a ** 2
    cos = abs(r @ g) / (np.linalg.norm(r) * np.linalg.norm(g))
    assert math.acos(min(1.0, cos)) <= 1e-6
