"""Complete rational fans, in practice the normal fans of polytopes."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .linalg import Echelon, as_vec, solve
from .polytope import GeometryError, LatticePolytope


@dataclass(frozen=True)
class Fan:
    """Rays (primitive integer vectors) and maximal cones (sets of ray indices)."""

    rays: tuple[tuple[int, ...], ...]
    cones: tuple[frozenset[int], ...]
    dim: int
    _bases: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for r in self.rays:
            if len(r) != self.dim or any(not isinstance(x, int) for x in r):
                raise GeometryError(f"ray {r} is not an integer vector of length {self.dim}")
        for c in self.cones:
            ech = Echelon()
            for i in c:
                ech.add(self.rays[i])
            if ech.rank != self.dim:
                raise GeometryError("maximal cones must be full-dimensional")

    def ray_index(self, ray: Sequence[int]) -> int:
        return self.rays.index(tuple(ray))

    def is_simplicial(self) -> bool:
        return all(len(c) == self.dim for c in self.cones)

    def cone_basis(self, k: int) -> tuple[int, ...]:
        """Indices of ``dim`` linearly independent rays of cone ``k``."""
        if k not in self._bases:
            ech = Echelon()
            chosen = []
            for i in sorted(self.cones[k]):
                if ech.add(self.rays[i]):
                    chosen.append(i)
            self._bases[k] = tuple(chosen)
        return self._bases[k]

    def cone_coordinates(self, k: int, v: Sequence) -> dict[int, Fraction] | None:
        """Write ``v`` as a nonnegative combination of rays of cone ``k``.

        Returns ``None`` if ``v`` is not in the cone.  Non-simplicial cones
        are handled by trying their simplicial sub-cones (Caratheodory).
        """
        v = as_vec(v)
        idx = sorted(self.cones[k])
        for sub in combinations(idx, self.dim):
            cols = [self.rays[i] for i in sub]
            A = [[cols[j][r] for j in range(self.dim)] for r in range(self.dim)]
            x = solve(A, v)
            if x is not None and all(t >= 0 for t in x):
                return dict(zip(sub, x))
        return None

    def locate(self, v: Sequence) -> int:
        """Index of a maximal cone containing ``v``."""
        for k in range(len(self.cones)):
            if self.cone_coordinates(k, v) is not None:
                return k
        raise GeometryError(f"{tuple(v)} is outside the support of the fan")


def normal_fan(P: LatticePolytope) -> Fan:
    """Inner normal fan: rays are facet normals, cones come from vertices."""
    if not P.is_full_dimensional:
        raise GeometryError("normal fan of a degenerate polytope")
    rays = tuple(n for n, _ in P.halfspaces)
    cones = tuple(P.vertex_facets())
    return Fan(rays, cones, P.dim)
