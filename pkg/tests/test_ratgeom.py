from fractions import Fraction
from itertools import product

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from kstoric.ratgeom import (
    GeometryError,
    NonConvexError,
    PiecewisePolynomial,
    PLFunction,
    from_halfspaces,
    hull,
    interpolate,
    lattice_point_count,
    lp_optimize,
    minkowski_combination,
    minkowski_sum,
    mixed_volume,
    normal_fan,
    slice_polytope,
)
from kstoric.ratgeom.functions import poly_eval
from kstoric.ratgeom.linalg import (
    as_fraction,
    det,
    int_det,
    integer_nth_root_floor,
    nullspace,
    rank,
    solve,
)

BL1P2 = [(-1, 0), (-1, 2), (0, -1), (2, -1)]
SIMPLEX3 = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
CUBE = list(product((0, 1), repeat=3))

points2 = st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=3, max_size=8)
points3 = st.lists(st.tuples(*[st.integers(-2, 2)] * 3), min_size=4, max_size=7)
slow = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])


def full_hull(pts, d):
    P = hull(pts, dim=d)
    return P if P.is_full_dimensional else None


def support_volume(P):
    # vol P = (1/n) sum over facets of (-offset) * lattice facet volume
    return sum(-off * P.facet_lattice_volume(i) for i, (_, off) in enumerate(P.halfspaces)) / P.dim


def support_mixed_volume(Q, P):
    # V(Q, P, ..., P) = (1/n) sum_F h_Q(F) * latvol(F), h_Q = -min_Q <., normal>
    total = Fraction(0)
    for i, (nrm, _) in enumerate(P.halfspaces):
        h = -min(sum(a * b for a, b in zip(nrm, q)) for q in Q.vertices)
        total += h * P.facet_lattice_volume(i)
    return total / P.dim


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def test_floats_are_rejected():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    assert as_fraction("3/4") == Fraction(3, 4)


def test_solve_unique_and_degenerate():
    assert solve([[2, 1], [1, 3]], [3, 5]) == (Fraction(4, 5), Fraction(7, 5))
    assert solve([[1, 1], [2, 2]], [1, 2]) is None
    assert solve([[1, 1], [1, 1]], [1, 2]) is None


def test_rank_and_nullspace():
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert rank(rows) == 2
    (k,) = nullspace(rows, 3)
    assert all(sum(a * b for a, b in zip(r, k)) == 0 for r in rows)


@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=3, max_size=3))
def test_integer_determinant_matches_rational(rows):
    assert int_det(rows) == det(rows)


@given(st.integers(0, 10 ** 30), st.integers(1, 6))
def test_integer_root_floor(a, k):
    r = integer_nth_root_floor(a, k)
    assert r ** k <= a < (r + 1) ** k


# ---------------------------------------------------------------------------
# polytopes
# ---------------------------------------------------------------------------

def test_triangle_volume_and_facets():
    P = hull([(0, 0), (2, 0), (0, 3), (1, 1)])
    assert P.volume() == 3
    assert sorted(P.vertices) == [(0, 0), (0, 3), (2, 0)]
    assert sorted(P.facet_lattice_volume(i) for i in range(3)) == [1, 2, 3]


def test_simplex_and_cube_in_three_dimensions():
    assert hull(SIMPLEX3).volume() == Fraction(1, 6)
    assert hull(CUBE).volume() == 1
    assert hull(CUBE).barycenter() == (Fraction(1, 2),) * 3


def test_blowup_quadrilateral_has_nine_lattice_points():
    # Pick: area 4, boundary 8 => interior 1, total 9
    P = hull(BL1P2)
    assert P.volume() == 4
    boundary = sum(P.facet_lattice_volume(i) for i in range(len(P.halfspaces)))
    assert boundary == 8
    assert lattice_point_count(P) == 9


@slow
@given(points2)
def test_pick_formula(pts):
    P = full_hull(pts, 2)
    if P is None or not P.is_lattice:
        return
    B = sum(P.facet_lattice_volume(i) for i in range(len(P.halfspaces)))
    interior = P.volume() - B / 2 + 1
    assert lattice_point_count(P) == interior + B


@slow
@given(points2)
def test_hull_contains_inputs_and_uses_only_inputs_as_vertices(pts):
    P = full_hull(pts, 2)
    if P is None:
        return
    assert all(P.contains(p) for p in pts)
    assert set(P.vertices) <= {tuple(map(Fraction, p)) for p in pts}
    assert hull(list(reversed(pts))) == P


@slow
@given(points3, st.integers(1, 3))
def test_volume_scales_and_matches_facet_formula(pts, k):
    P = full_hull(pts, 3)
    if P is None:
        return
    assert P.scale(k).volume() == k ** 3 * P.volume()
    assert P.translate((1, -2, 3)).volume() == P.volume()
    assert support_volume(P) == P.volume()


@slow
@given(points2)
def test_halfspace_round_trip(pts):
    P = full_hull(pts, 2)
    if P is None:
        return
    assert from_halfspaces(P.halfspaces, 2) == P
    assert from_halfspaces(P.halfspaces, 2, interior=P.barycenter()) == P


def test_unbounded_halfspaces_are_rejected():
    with pytest.raises(GeometryError):
        from_halfspaces([((1, 0), 0), ((0, 1), 0)], 2, interior=(1, 1))


def test_minkowski_sum_of_segments_is_square():
    A, B = hull([(0, 0), (1, 0)]), hull([(0, 0), (0, 1)])
    S = minkowski_sum(A, B)
    assert S.volume() == 1
    assert mixed_volume([A, B]) == Fraction(1, 2)


@slow
@given(points2, points2)
def test_mixed_volume_matches_support_functions_2d(p, q):
    P, Q = full_hull(p, 2), full_hull(q, 2)
    if P is None or Q is None:
        return
    assert mixed_volume([Q, P]) == support_mixed_volume(Q, P)
    assert mixed_volume([P, P]) == P.volume()


@settings(max_examples=10, deadline=None)
@given(points3, points3)
def test_mixed_volume_matches_support_functions_3d(p, q):
    P, Q = full_hull(p, 3), full_hull(q, 3)
    if P is None or Q is None:
        return
    assert mixed_volume([Q, P, P]) == support_mixed_volume(Q, P)


def test_minkowski_combination_volume_polynomial():
    P, Q = hull(BL1P2), hull([(0, 0), (1, 0), (0, 1)])
    vols = [minkowski_combination([(1, P), (s, Q)]).volume() for s in range(4)]
    coeffs = interpolate(range(4), vols)
    assert coeffs[0] == P.volume() and coeffs[2] == Q.volume()
    assert coeffs[1] == 2 * mixed_volume([P, Q])


def test_slice_and_lp():
    P = hull(BL1P2)
    S = slice_polytope(P, (1, 1), 0)
    assert S.volume() == Fraction(5, 2)
    assert lp_optimize((1, 1), P, "min") == (-1, (Fraction(-1), Fraction(0)))
    assert lp_optimize((1, 1), P, "max")[0] == 1


def test_normal_fan_of_blowup():
    F = normal_fan(hull(BL1P2))
    assert sorted(F.rays) == [(-1, -1), (0, 1), (1, 0), (1, 1)]
    assert F.is_simplicial
    k = F.locate((2, 1))
    assert set(F.cone_coordinates(k, (2, 1))) <= set(F.cones[k])


# ---------------------------------------------------------------------------
# polynomials and piecewise functions
# ---------------------------------------------------------------------------

@given(st.lists(st.fractions(max_denominator=6), min_size=1, max_size=5))
def test_interpolation_recovers_polynomial(coeffs):
    xs = list(range(len(coeffs) + 2))
    got = interpolate(xs, [poly_eval(coeffs, x) for x in xs])
    assert [poly_eval(got, x) for x in (7, -3)] == [poly_eval(coeffs, x) for x in (7, -3)]


def test_piecewise_polynomial_checks_continuity():
    with pytest.raises(ValueError, match="discontinuity"):
        PiecewisePolynomial((Fraction(0), Fraction(1), Fraction(2)),
                            ((Fraction(1),), (Fraction(3), Fraction(-1))))
    with pytest.raises(ValueError, match="vanish"):
        PiecewisePolynomial((Fraction(0), Fraction(1)), ((Fraction(1),),))
    g = PiecewisePolynomial((Fraction(0), Fraction(1)), ((Fraction(1), Fraction(-1)),))
    assert g.integral() == Fraction(1, 2)


def epigraph_integral(f, P):
    top = f.max() + 1
    hs = [(tuple(n) + (0,), o) for n, o in P.halfspaces]
    hs += [(tuple(-x for x in a) + (1,), b) for a, b in f.forms]
    hs.append(((0,) * P.dim + (-1,), -top))
    E = from_halfspaces(hs, P.dim + 1)
    return top * P.volume() - E.volume()


@slow
@given(points2, st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.integers(-3, 3)),
                         min_size=1, max_size=4))
def test_pl_integral_matches_epigraph_volume(pts, forms):
    P = full_hull(pts, 2)
    if P is None:
        return
    f = PLFunction(P, [((a, b), c) for a, b, c in forms])
    assert f.integral() == epigraph_integral(f, P)
    cells = f.cells()
    assert sum(cell.volume() for _, cell in cells) == P.volume()
    for i, cell in cells:
        a, b = f.forms[i]
        z = cell.barycenter()
        assert f(z) == sum(x * y for x, y in zip(a, z)) + b
    assert f.min() == min(f(v) for _, cell in cells for v in cell.vertices)


@slow
@given(st.lists(st.integers(0, 4), min_size=4, max_size=4))
def test_support_function_lies_below_data(vals):
    P = hull(BL1P2)
    f = PLFunction.from_support(P, BL1P2, vals)
    assert all(f(p) <= y for p, y in zip(BL1P2, vals))
    assert sum(f(p) == y for p, y in zip(BL1P2, vals)) >= 3


def test_pieces_must_be_convex_and_cover():
    P = hull([(0,), (2,)])
    good = PLFunction.from_pieces(P, [(hull([(0,), (1,)]), (0,), 0), (hull([(1,), (2,)]), (1,), -1)])
    assert good((2,)) == 1
    with pytest.raises(NonConvexError):
        PLFunction.from_pieces(P, [(hull([(0,), (1,)]), (1,), 0), (hull([(1,), (2,)]), (0,), 1)])
    with pytest.raises(GeometryError):
        PLFunction.from_pieces(P, [(hull([(0,), (1,)]), (0,), 0)])


def test_support_points_must_surround_domain():
    P = hull(BL1P2)
    with pytest.raises(GeometryError):
        PLFunction.from_support(P, [(0, 0), (1, 0), (0, 1)], [0, 0, 0])


def test_cells_of_product_of_kinks_3d():
    P = hull(CUBE)
    f = PLFunction(P, [((0, 0, 0), 0), ((2, 0, 0), -1), ((0, 2, 0), -1)])
    assert len(f.cells()) == 3
    # m = max(x, y) has density 2m, so the mean is int_{1/2}^1 (2m - 1) 2m dm
    assert f.mean() == Fraction(5, 12)
