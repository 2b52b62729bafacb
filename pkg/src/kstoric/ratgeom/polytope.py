"""Exact rational polytopes.

A :class:`LatticePolytope` carries both a vertex list and a facet list; the
two are produced together by an exact beneath-beyond convex hull, so they
always describe the same set.  Rational input is scaled to a common
denominator and all hull work is done on integer points, which keeps the
arithmetic fast without giving up exactness.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import ceil, comb, factorial, floor
from typing import Iterable, Sequence

from .linalg import (
    Echelon,
    as_fraction,
    as_vec,
    common_denominator,
    dot,
    hyperplane_normal,
    int_det,
    integral_direction,
    nullspace,
)

Vec = tuple[Fraction, ...]


class GeometryError(ValueError):
    """Invalid geometric input (dimension mismatch, empty or unbounded set...)."""


# ---------------------------------------------------------------------------
# integer hull kernel
# ---------------------------------------------------------------------------

def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _hull_full(points: list[tuple[int, ...]], d: int):
    """Beneath-beyond hull of full-dimensional integer points in Z^d.

    Returns ``(groups, interior)`` where ``groups`` maps ``(normal, offset)``
    (primitive inward normal, integer offset) to the boundary simplices lying
    in that facet.  Coplanar simplices are kept, so the union of simplices is
    a triangulation of the boundary.
    """
    if d == 1:
        lo = min(p[0] for p in points)
        hi = max(p[0] for p in points)
        return {((1,), lo): [((lo,),)], ((-1,), -hi): [((hi,),)]}, None

    # initial simplex, greedily
    ech = Echelon()
    simplex = [points[0]]
    for p in points[1:]:
        if ech.add(_sub(p, points[0])):
            simplex.append(p)
            if len(simplex) == d + 1:
                break
    if len(simplex) < d + 1:
        raise GeometryError("points are not full-dimensional")
    interior = tuple(sum(c) for c in zip(*simplex))  # (d+1) * centroid
    dp1 = d + 1

    facets: dict[int, tuple] = {}
    ridges: dict[frozenset, list[int]] = {}
    counter = [0]

    def add_facet(verts):
        normal = hyperplane_normal(verts)
        off = dot(normal, verts[0])
        if dot(normal, interior) < dp1 * off:
            normal = tuple(-x for x in normal)
            off = -off
        fid = counter[0]
        counter[0] += 1
        facets[fid] = (verts, normal, off)
        for k in range(d):
            r = frozenset(verts[:k] + verts[k + 1:])
            ridges.setdefault(r, []).append(fid)

    for k in range(d + 1):
        add_facet(tuple(simplex[:k] + simplex[k + 1:]))

    used = set(simplex)
    for p in points:
        if p in used:
            continue
        visible = {fid for fid, (_, nrm, off) in facets.items() if dot(nrm, p) < off}
        if not visible:
            continue
        horizon = []
        for fid in visible:
            verts = facets[fid][0]
            for k in range(d):
                ridge = verts[:k] + verts[k + 1:]
                owners = ridges[frozenset(ridge)]
                other = owners[0] if owners[1] == fid else owners[1]
                if other not in visible:
                    horizon.append(ridge)
        for fid in visible:
            verts = facets.pop(fid)[0]
            for k in range(d):
                r = frozenset(verts[:k] + verts[k + 1:])
                owners = ridges[r]
                owners.remove(fid)
                if not owners:
                    del ridges[r]
        for ridge in horizon:
            add_facet(ridge + (p,))

    groups: dict[tuple, list] = {}
    for verts, nrm, off in facets.values():
        groups.setdefault((nrm, off), []).append(verts)
    return groups, interior


def _extreme_points(groups, d: int) -> list[tuple[int, ...]]:
    candidates = {p for simps in groups.values() for s in simps for p in s}
    keys = list(groups)
    out = []
    for p in candidates:
        ech = Echelon()
        for nrm, off in keys:
            if dot(nrm, p) == off:
                ech.add(nrm)
                if ech.rank == d:
                    out.append(p)
                    break
    return out


# ---------------------------------------------------------------------------
# the polytope type
# ---------------------------------------------------------------------------

class LatticePolytope:
    """Bounded rational polytope with synchronized V- and H-representations.

    ``halfspaces`` are pairs ``(normal, offset)`` meaning ``<u, normal> >= offset``
    with ``normal`` a primitive integer vector.  Lower-dimensional polytopes
    are allowed; they additionally carry affine ``equations`` and have
    volume zero.
    """

    __slots__ = (
        "dim", "affine_dim", "vertices", "halfspaces", "equations",
        "_scale", "_groups", "_cache",
    )

    def __init__(self, dim, affine_dim, vertices, halfspaces, equations=(),
                 scale=1, groups=None):
        self.dim = dim
        self.affine_dim = affine_dim
        self.vertices: tuple[Vec, ...] = vertices
        self.halfspaces: tuple[tuple[tuple[int, ...], Fraction], ...] = halfspaces
        self.equations: tuple[tuple[tuple[int, ...], Fraction], ...] = equations
        self._scale = scale
        self._groups = groups
        self._cache: dict = {}

    # -- construction -----------------------------------------------------

    @classmethod
    def empty(cls, dim: int) -> LatticePolytope:
        return cls(dim, -1, (), ())

    @property
    def is_empty(self) -> bool:
        return self.affine_dim < 0

    @property
    def is_degenerate(self) -> bool:
        return self.affine_dim < self.dim

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    def __repr__(self):
        verts = ", ".join("(" + ", ".join(str(x) for x in v) + ")" for v in self.vertices)
        return f"LatticePolytope(dim={self.dim}, affine_dim={self.affine_dim}, vertices=[{verts}])"

    def __eq__(self, other):
        if not isinstance(other, LatticePolytope):
            return NotImplemented
        return self.dim == other.dim and self.vertices == other.vertices

    def __hash__(self):
        return hash((self.dim, self.vertices))

    # -- basic queries ----------------------------------------------------

    @property
    def is_lattice(self) -> bool:
        return all(x.denominator == 1 for v in self.vertices for x in v)

    def contains(self, u: Sequence) -> bool:
        if self.is_empty:
            return False
        u = as_vec(u)
        return (all(dot(n, u) >= o for n, o in self.halfspaces)
                and all(dot(n, u) == o for n, o in self.equations))

    def facet_index(self, normal: Sequence[int]) -> int:
        normal = tuple(normal)
        for i, (n, _) in enumerate(self.halfspaces):
            if n == normal:
                return i
        raise KeyError(f"no facet with normal {normal}")

    def facet_vertices(self, i: int) -> list[Vec]:
        n, o = self.halfspaces[i]
        return [v for v in self.vertices if dot(n, v) == o]

    def vertex_facets(self) -> list[frozenset[int]]:
        """For each vertex, the indices of the facets containing it."""
        if "incid" not in self._cache:
            self._cache["incid"] = [
                frozenset(i for i, (n, o) in enumerate(self.halfspaces) if dot(n, v) == o)
                for v in self.vertices
            ]
        return self._cache["incid"]

    def edges(self) -> list[tuple[int, int]]:
        """Pairs of vertex indices spanning an edge (full-dimensional case)."""
        if "edges" in self._cache:
            return self._cache["edges"]
        inc = self.vertex_facets()
        out = []
        d = self.affine_dim
        for i, j in combinations(range(len(self.vertices)), 2):
            common = inc[i] & inc[j]
            if len(common) < d - 1:
                continue
            ech = Echelon()
            for k in common:
                ech.add(self.halfspaces[k][0])
                if ech.rank == d - 1:
                    break
            if ech.rank == d - 1:
                out.append((i, j))
        self._cache["edges"] = out
        return out

    def translate(self, w: Sequence) -> LatticePolytope:
        w = as_vec(w)
        return hull([tuple(a + b for a, b in zip(v, w)) for v in self.vertices], dim=self.dim)

    def scale(self, k) -> LatticePolytope:
        k = as_fraction(k)
        if k < 0:
            raise GeometryError("negative dilation")
        if k == 0:
            return hull([tuple(Fraction(0) for _ in range(self.dim))])
        return hull([tuple(k * x for x in v) for v in self.vertices], dim=self.dim)

    def lift(self, value=0) -> LatticePolytope:
        """The polytope ``self x {value}`` one dimension up."""
        value = as_fraction(value)
        return hull([v + (value,) for v in self.vertices], dim=self.dim + 1)

    # -- measures ---------------------------------------------------------

    def _boundary_simplices(self):
        return [s for simps in self._groups.values() for s in simps]

    def volume(self) -> Fraction:
        if "vol" not in self._cache:
            if not self.is_full_dimensional:
                self._cache["vol"] = Fraction(0)
            else:
                self._cache["vol"], self._cache["bary"] = self._cone_integrals()
        return self._cache["vol"]

    def barycenter(self) -> Vec:
        if not self.is_full_dimensional:
            raise GeometryError("barycenter of a degenerate polytope")
        self.volume()
        return self._cache["bary"]

    def _cone_integrals(self):
        d = self.dim
        D = self._scale
        apex = tuple(int(x * D) for x in self.vertices[0])
        total = 0
        moment = [0] * d
        for s in self._boundary_simplices():
            det = abs(int_det([_sub(p, apex) for p in s]))
            if det == 0:
                continue
            total += det
            for j in range(d):
                moment[j] += det * (apex[j] + sum(p[j] for p in s))
        vol = Fraction(total, factorial(d) * D ** d)
        bary = tuple(Fraction(m, (d + 1) * total * D) for m in moment)
        return vol, bary

    def facet_lattice_volume(self, i: int) -> Fraction:
        """(n-1)-volume of facet ``i`` normalized to its own lattice."""
        if not self.is_full_dimensional:
            raise GeometryError("facet volumes need a full-dimensional polytope")
        key = ("latvol", i)
        if key in self._cache:
            return self._cache[key]
        normal, off = self.halfspaces[i]
        d = self.dim
        D = self._scale
        ioff = off * D
        simps = self._groups[(normal, int(ioff))]
        j = next(k for k, x in enumerate(normal) if x != 0)
        total = 0
        for s in simps:
            apex = tuple(x + (1 if k == j else 0) for k, x in enumerate(s[0]))
            total += abs(int_det([_sub(p, apex) for p in s]))
        val = Fraction(total, factorial(d - 1) * abs(normal[j]) * D ** (d - 1))
        self._cache[key] = val
        return val

    def face_lattice_volume(self, normal: Sequence, offset) -> Fraction:
        """Lattice (n-1)-volume of the face cut out by ``<u, normal> = offset``.

        Zero if that face has dimension below n-1 (or is empty).
        """
        raw = as_vec(normal)
        nrm = integral_direction(raw)
        j = next(k for k, x in enumerate(nrm) if x)
        off = as_fraction(offset) * nrm[j] / raw[j]
        for i, (n, o) in enumerate(self.halfspaces):
            if n == nrm and o == off:
                return self.facet_lattice_volume(i)
        return Fraction(0)

    def lattice_points(self, k: int = 1) -> list[tuple[int, ...]]:
        return lattice_points(self, k)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def hull(points: Iterable[Sequence], dim: int | None = None) -> LatticePolytope:
    """Convex hull of a finite point set, with certified H-representation."""
    pts = sorted({as_vec(p) for p in points})
    if not pts:
        if dim is None:
            raise GeometryError("hull of an empty point set needs an explicit dimension")
        return LatticePolytope.empty(dim)
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise GeometryError("points of different dimensions")
    if dim is not None and dim != d:
        raise GeometryError(f"expected dimension {dim}, got {d}")

    D = common_denominator(x for p in pts for x in p)
    ipts = [tuple(int(x * D) for x in p) for p in pts]

    base = ipts[0]
    ech = Echelon()
    for p in ipts[1:]:
        ech.add(_sub(p, base))
    k = ech.rank

    if k == d:
        groups, _ = _hull_full(ipts, d)
        verts = sorted(tuple(Fraction(x, D) for x in p) for p in _extreme_points(groups, d))
        halfspaces = tuple(sorted((nrm, Fraction(off, D)) for nrm, off in groups))
        return LatticePolytope(d, d, tuple(verts), halfspaces, (), D, groups)

    # lower-dimensional: equations, then a hull in a coordinate projection
    diffs = [_sub(p, base) for p in ipts[1:]]
    eqs = []
    for v in nullspace(diffs, d) if diffs else nullspace([[0] * d], d):
        nrm = integral_direction(v)
        eqs.append((nrm, Fraction(dot(nrm, base), D)))
    equations = tuple(sorted(eqs))
    if k == 0:
        return LatticePolytope(d, 0, (pts[0],), (), equations, D, None)
    coords = _independent_coordinates(diffs, k)
    proj = [tuple(p[c] for c in coords) for p in ipts]
    groups, _ = _hull_full(proj, k) if k > 1 else _hull_full(proj, 1)
    ext = set(_extreme_points(groups, k))
    verts = sorted(pts[i] for i, q in enumerate(proj) if q in ext)
    halfspaces = []
    for nrm, off in groups:
        full = [0] * d
        for c, x in zip(coords, nrm):
            full[c] = x
        halfspaces.append((tuple(full), Fraction(off, D)))
    return LatticePolytope(d, k, tuple(verts), tuple(sorted(halfspaces)), equations, D, None)


def _independent_coordinates(vectors, k):
    d = len(vectors[0])
    for coords in combinations(range(d), k):
        ech = Echelon()
        for v in vectors:
            ech.add([v[c] for c in coords])
        if ech.rank == k:
            return coords
    raise AssertionError("no projection preserves the affine rank")


def _integer_constraints(halfspaces):
    """Scale each ``(normal, offset)`` to an all-integer row ``(a, b)``."""
    rows = []
    for normal, offset in halfspaces:
        normal = as_vec(normal)
        offset = as_fraction(offset)
        m = common_denominator(list(normal) + [offset])
        a = tuple(int(x * m) for x in normal)
        if not any(a):
            if offset > 0:
                return None  # 0 >= positive: infeasible
            continue
        rows.append((a, int(offset * m)))
    return rows


def from_halfspaces(halfspaces: Iterable[tuple[Sequence, object]], dim: int,
                    interior: Sequence | None = None) -> LatticePolytope:
    """Polytope ``{u : <u, normal> >= offset for all rows}``; must be bounded.

    If a strictly interior point is supplied, the vertices are found through
    polar duality (one hull computation); otherwise every ``dim``-subset of
    constraints is tried.
    """
    halfspaces = list(halfspaces)
    rows = _integer_constraints(halfspaces)
    if rows is None:
        return LatticePolytope.empty(dim)
    if interior is not None:
        z = as_vec(interior)
        if all(dot(a, z) > b for a, b in rows):
            return _vertices_by_duality(rows, z, dim)
    verts = _vertices_by_enumeration(rows, dim)
    if not verts:
        return LatticePolytope.empty(dim)
    return hull(verts, dim=dim)


def _vertices_by_enumeration(rows, d):
    rows = sorted(set(rows))
    found = set()
    for subset in combinations(rows, d):
        A = [r[0] for r in subset]
        det0 = int_det(A)
        if det0 == 0:
            continue
        X = []
        for i in range(d):
            Ai = [list(a) for a in A]
            for r, (_, b) in enumerate(subset):
                Ai[r][i] = b
            X.append(int_det(Ai))
        if det0 > 0:
            ok = all(dot(a, X) >= b * det0 for a, b in rows)
        else:
            ok = all(dot(a, X) <= b * det0 for a, b in rows)
        if ok:
            found.add(tuple(Fraction(x, det0) for x in X))
    return found


def _vertices_by_duality(rows, z, d):
    # shift z to the origin: <a, y> >= b - <a, z> =: c < 0; polar points a / (-c)
    pts = []
    for a, b in rows:
        c = b - dot(a, z)
        pts.append(tuple(Fraction(x) / (-c) for x in a))
    dual = hull(pts, dim=d)
    if not dual.is_full_dimensional:
        raise GeometryError("constraints do not bound a polytope")
    if not dual.contains([0] * d) or any(o >= 0 for _, o in dual.halfspaces):
        raise GeometryError("constraints do not bound a polytope")
    verts = []
    for nrm, off in dual.halfspaces:
        verts.append(tuple(Fraction(x) / (-off) + zc for x, zc in zip(nrm, z)))
    return hull(verts, dim=d)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def volume(P: LatticePolytope) -> Fraction:
    return P.volume()


def barycenter(P: LatticePolytope) -> Vec:
    return P.barycenter()


def facet_lattice_volume(P: LatticePolytope, facet_index: int) -> Fraction:
    normal = P.halfspaces[facet_index][0]
    if any(not isinstance(x, int) for x in normal):
        raise GeometryError("facet normal is not an integer vector")
    return P.facet_lattice_volume(facet_index)


def minkowski_sum(P: LatticePolytope, Q: LatticePolytope) -> LatticePolytope:
    if P.dim != Q.dim:
        raise GeometryError("Minkowski sum of polytopes in different dimensions")
    if P.is_empty or Q.is_empty:
        return LatticePolytope.empty(P.dim)
    return _minkowski_cached(P.vertices, Q.vertices, P.dim)


@lru_cache(maxsize=4096)
def _minkowski_cached(pv, qv, dim):
    return hull([tuple(a + b for a, b in zip(p, q)) for p in pv for q in qv], dim=dim)


def minkowski_combination(terms: Sequence[tuple[int | Fraction, LatticePolytope]]) -> LatticePolytope:
    """``sum c_i P_i`` for nonnegative scalars (uses ``cP + c'P = (c+c')P``)."""
    merged: dict[tuple, Fraction] = {}
    dim = None
    for c, P in terms:
        c = as_fraction(c)
        if c < 0:
            raise GeometryError("negative Minkowski coefficient")
        dim = P.dim if dim is None else dim
        if c:
            merged[P.vertices] = merged.get(P.vertices, Fraction(0)) + c
    if dim is None:
        raise GeometryError("empty Minkowski combination")
    if not merged:
        return hull([tuple(Fraction(0) for _ in range(dim))])
    acc = None
    for verts, c in sorted(merged.items()):
        scaled = hull([tuple(c * x for x in v) for v in verts], dim=dim)
        acc = scaled if acc is None else minkowski_sum(acc, scaled)
    return acc


def mixed_volume(bodies: Sequence[LatticePolytope]) -> Fraction:
    """Mixed volume normalized so that ``V(P, ..., P) = vol(P)``.

    Inclusion-exclusion over Minkowski sums of sub-multisets; repeated
    bodies are grouped so each distinct multiset sum is built once.
    """
    m = len(bodies)
    if m == 0:
        raise GeometryError("mixed volume of no bodies")
    d = bodies[0].dim
    if any(B.dim != d for B in bodies) or m != d:
        raise GeometryError(f"mixed volume needs exactly {d} bodies in dimension {d}")
    distinct: list[LatticePolytope] = []
    counts: list[int] = []
    for B in bodies:
        for i, E in enumerate(distinct):
            if E == B:
                counts[i] += 1
                break
        else:
            distinct.append(B)
            counts.append(1)
    total = Fraction(0)
    for sel in product(*(range(c + 1) for c in counts)):
        s = sum(sel)
        if s == 0:
            continue
        mult = 1
        for c, k in zip(counts, sel):
            mult *= comb(c, k)
        vol = minkowski_combination([(k, B) for k, B in zip(sel, distinct) if k]).volume()
        total += (-1) ** (m - s) * mult * vol
    return total / factorial(m)


def slice_polytope(P: LatticePolytope, v: Sequence, c) -> LatticePolytope:
    """``P ∩ {u : <u, v> >= c}``, computed from vertices and edges of ``P``."""
    v = as_vec(v)
    c = as_fraction(c)
    if P.is_empty:
        return P
    vals = [dot(v, p) for p in P.vertices]
    if all(x >= c for x in vals):
        return P
    if all(x < c for x in vals):
        return LatticePolytope.empty(P.dim)
    pts = [p for p, x in zip(P.vertices, vals) if x >= c]
    if P.is_full_dimensional:
        pairs = P.edges()
    else:
        pairs = list(combinations(range(len(P.vertices)), 2))
    for i, j in pairs:
        a, b = vals[i], vals[j]
        if (a - c) * (b - c) < 0:
            t = (c - a) / (b - a)
            pi, pj = P.vertices[i], P.vertices[j]
            pts.append(tuple(x + t * (y - x) for x, y in zip(pi, pj)))
    return hull(pts, dim=P.dim)


def lp_optimize(objective: Sequence, P: LatticePolytope, sense: str = "min") -> tuple[Fraction, Vec]:
    """Exact optimum of a linear functional over ``P`` and an attaining vertex.

    Ties are broken by the lexicographically smallest vertex.
    """
    if P.is_empty:
        raise GeometryError("linear program over an empty polytope")
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    obj = as_vec(objective)
    best = None
    for v in P.vertices:
        val = dot(obj, v)
        if best is None or (val < best[0] if sense == "min" else val > best[0]):
            best = (val, v)
    return best


def lattice_points(P: LatticePolytope, k: int = 1) -> list[tuple[int, ...]]:
    """All integer points of the dilate ``kP``."""
    if P.is_empty:
        return []
    if k < 0:
        raise GeometryError("negative dilation")
    d = P.dim
    lo = [ceil(min(v[i] for v in P.vertices) * k) for i in range(d)]
    hi = [floor(max(v[i] for v in P.vertices) * k) for i in range(d)]
    cons = [(n, o * k) for n, o in P.halfspaces]
    eqs = [(n, o * k) for n, o in P.equations]
    out = []
    for u in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(dot(n, u) >= o for n, o in cons) and all(dot(n, u) == o for n, o in eqs):
            out.append(u)
    return out


def lattice_point_count(P: LatticePolytope, k: int = 1) -> int:
    return len(lattice_points(P, k))
