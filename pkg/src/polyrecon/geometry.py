"""Polytope geometry: halfspace intersection, random generation, tangent cones.

Vertices are enumerated exhaustively over d-subsets of tight constraints,
which is trivially correct at desk scale (d <= 5, tens of facets) and avoids
the degeneracy pitfalls of incremental hull codes.  Only simple polytopes are
accepted: every vertex tight on exactly d facets, d neighbors each.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .errors import GenerationError, NotBoundedError, NotSimpleError
from .linalg import determinant, dot, solve_square
from .scalars import ScalarMode

__all__ = [
    "Halfspace",
    "Polytope",
    "TangentCone",
    "intersect_halfspaces",
    "random_simple_polytope",
    "random_simple_polytope_with_n_vertices",
    "tangent_cone",
    "check_simple",
]


@dataclass(frozen=True)
class Halfspace:
    """Constraint <normal, x> <= offset."""

    normal: tuple
    offset: object

    def __post_init__(self):
        if all(x == 0 for x in self.normal):
            raise ValueError("halfspace normal must be nonzero")

    def residual(self, point):
        """offset - <normal, point>; nonnegative inside."""
        return self.offset - dot(self.normal, point)


@dataclass(frozen=True)
class Polytope:
    """Simple convex polytope: vertices, facets, incidence and edge graph."""

    dim: int
    vertices: tuple
    facets: tuple
    vertex_facets: tuple
    adjacency: tuple
    mode: ScalarMode

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def neighbors(self, i: int) -> tuple:
        return self.adjacency[i]

    def adjacency_matrix(self):
        n = self.n_vertices
        M = [[False] * n for _ in range(n)]
        for i, nb in enumerate(self.adjacency):
            for j in nb:
                M[i][j] = True
        return M

    def edges(self):
        return sorted({(min(i, j), max(i, j))
                       for i, nb in enumerate(self.adjacency) for j in nb})

    def interior_point(self):
        """Vertex centroid; interior for any polytope."""
        n = self.n_vertices
        if self.mode.is_exact:
            inv = Fraction(1, n)
        else:
            with self.mode.context():
                inv = 1 / mp.mpf(n)
        return tuple(sum(v[k] for v in self.vertices) * inv for k in range(self.dim))


@dataclass(frozen=True)
class TangentCone:
    """Apex vertex, one edge vector per incident edge, |det| of the edge matrix."""

    apex: tuple
    edges: tuple
    det_abs: object


def _float_norm(vec):
    return mp.sqrt(sum(mp.mpf(abs(x)) ** 2 for x in vec))


def _tight_tolerance(hs: Halfspace, point, bits: int):
    scale = _float_norm(hs.normal) * (1 + _float_norm(point))
    return mp.ldexp(scale, -(bits // 2))


def intersect_halfspaces(halfspaces, mode: ScalarMode = ScalarMode.exact()) -> Polytope:
    """Enumerate the vertex set of an H-polytope and build its edge graph.

    Raises NotBoundedError for empty/unbounded input, NotSimpleError when a
    vertex is tight on more than d constraints (degenerate input is rejected,
    not repaired).
    """
    halfspaces = tuple(halfspaces)
    if not halfspaces:
        raise NotBoundedError("not a bounded polytope")
    d = len(halfspaces[0].normal)
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if len(halfspaces) < d + 1:
        raise NotBoundedError("not a bounded polytope")
    if any(len(h.normal) != d for h in halfspaces):
        raise ValueError("inconsistent halfspace dimensions")

    with mode.context():
        candidates = []
        for subset in itertools.combinations(range(len(halfspaces)), d):
            A = [list(halfspaces[i].normal) for i in subset]
            b = [halfspaces[i].offset for i in subset]
            x = solve_square(A, b, mode)
            if x is None:
                continue
            if _feasible(halfspaces, x, mode):
                candidates.append(tuple(x))
        vertices = _dedup(candidates, mode)
        if not vertices:
            raise NotBoundedError("not a bounded polytope")
        vertices = sorted(vertices)

        active = []
        for v in vertices:
            tight = frozenset(i for i, h in enumerate(halfspaces)
                              if _is_tight(h, v, mode))
            if len(tight) > d:
                raise NotSimpleError(f"not simple: vertex {v} tight on {len(tight)} facets")
            if len(tight) < d:
                raise NotSimpleError(f"vertex {v} tight on fewer than {d} facets")
            active.append(tight)

        _check_bounded(halfspaces, vertices, active, mode)

        used = sorted({i for s in active for i in s})
        remap = {old: new for new, old in enumerate(used)}
        facets = tuple(halfspaces[i] for i in used)
        vertex_facets = tuple(frozenset(remap[i] for i in s) for s in active)

        n = len(vertices)
        adjacency = []
        for i in range(n):
            nb = tuple(j for j in range(n) if j != i
                       and len(vertex_facets[i] & vertex_facets[j]) == d - 1)
            adjacency.append(nb)
        if any(len(nb) != d for nb in adjacency):
            raise NotSimpleError("vertex degree differs from dimension")
        if n < d + 1:
            raise NotSimpleError("not a full-dimensional simple polytope")
        _check_connected(adjacency)

    return Polytope(dim=d, vertices=tuple(vertices), facets=facets,
                    vertex_facets=vertex_facets, adjacency=tuple(adjacency),
                    mode=mode)


def _feasible(halfspaces, point, mode: ScalarMode) -> bool:
    for h in halfspaces:
        r = h.residual(point)
        if mode.is_exact:
            if r < 0:
                return False
        else:
            if r < -_tight_tolerance(h, point, mode.bits):
                return False
    return True


def _is_tight(h: Halfspace, point, mode: ScalarMode) -> bool:
    r = h.residual(point)
    if mode.is_exact:
        return r == 0
    return abs(r) <= _tight_tolerance(h, point, mode.bits)


def _dedup(points, mode: ScalarMode):
    if mode.is_exact:
        return list(set(points))
    out = []
    for p in points:
        tol = mp.ldexp(1 + _float_norm(p), -(mode.bits // 2))
        if not any(all(abs(a - b) <= tol for a, b in zip(p, q)) for q in out):
            out.append(p)
    return out


def _check_connected(adjacency):
    n = len(adjacency)
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in adjacency[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    if len(seen) != n:
        raise NotSimpleError("edge graph is disconnected")


def _check_bounded(halfspaces, vertices, active, mode: ScalarMode):
    """Every edge ray at every vertex must be blocked by some halfspace."""
    d = len(vertices[0])
    for v, tight in zip(vertices, active):
        rows = [list(halfspaces[i].normal) for i in sorted(tight)]
        for k in range(d):
            rhs = [Fraction(0)] * d
            rhs[k] = Fraction(-1)
            ray = solve_square(rows, rhs, mode)
            if ray is None:
                raise NotSimpleError("degenerate tangent cone")
            blocked = False
            for h in halfspaces:
                s = dot(h.normal, ray)
                if mode.is_exact:
                    if s > 0:
                        blocked = True
                        break
                else:
                    tol = mp.ldexp(_float_norm(h.normal) * _float_norm(ray),
                                   -(mode.bits // 2))
                    if s > tol:
                        blocked = True
                        break
            if not blocked:
                raise NotBoundedError("not a bounded polytope")


def random_simple_polytope(d: int, n_facets: int, seed: int,
                           mode: ScalarMode = ScalarMode.exact(),
                           max_retries: int = 100) -> Polytope:
    """Intersection of n_facets random integer halfspaces tangent to a sphere.

    Normals have entries in [-20, 20]; offsets put each hyperplane near a
    sphere of radius 10 around the origin, so the origin is interior and the
    polytope has rational vertices.  Deterministic per seed; degenerate draws
    are retried.
    """
    if n_facets < d + 1:
        raise ValueError("need at least d+1 facets")
    rng = random.Random(seed)
    for _ in range(max_retries):
        halfspaces = []
        for _ in range(n_facets):
            normal = _random_nonzero_vector(rng, d)
            radius = 10
            offset = max(1, round(radius * math.sqrt(sum(x * x for x in normal))))
            halfspaces.append(Halfspace(tuple(Fraction(x) for x in normal),
                                        Fraction(offset)))
        try:
            return intersect_halfspaces(halfspaces, mode)
        except (NotBoundedError, NotSimpleError):
            continue
    raise GenerationError("generation failed")


def _random_nonzero_vector(rng, d):
    while True:
        v = tuple(rng.randint(-20, 20) for _ in range(d))
        if any(v):
            return v


def random_simple_polytope_with_n_vertices(d: int, n_facets: int, n_vertices: int,
                                           seed: int,
                                           mode: ScalarMode = ScalarMode.exact(),
                                           max_retries: int = 200) -> Polytope:
    """Retry generation until the vertex count comes out exactly n_vertices."""
    rng = random.Random(seed)
    for _ in range(max_retries):
        sub_seed = rng.randrange(2 ** 32)
        try:
            P = random_simple_polytope(d, n_facets, sub_seed, mode,
                                       max_retries=20)
        except GenerationError:
            continue
        if P.n_vertices == n_vertices:
            return P
    raise GenerationError(
        f"generation failed: no {n_vertices}-vertex draw in {max_retries} tries")


def tangent_cone(P: Polytope, vertex_index: int) -> TangentCone:
    """Edge vectors u - v to the d adjacent vertices, ascending index order."""
    v = P.vertices[vertex_index]
    nb = P.adjacency[vertex_index]
    if len(nb) != P.dim:
        raise NotSimpleError(f"non-simple vertex {vertex_index}")
    edges = tuple(tuple(P.vertices[u][k] - v[k] for k in range(P.dim))
                  for u in nb)
    with P.mode.context():
        det = determinant([list(e) for e in edges], P.mode)
        det_abs = -det if det < 0 else det
    if not _det_nonzero(det_abs, edges, P.mode):
        raise NotSimpleError(f"non-simple vertex {vertex_index}: dependent edges")
    return TangentCone(apex=v, edges=edges, det_abs=det_abs)


def _det_nonzero(det_abs, edges, mode: ScalarMode) -> bool:
    if mode.is_exact:
        return det_abs != 0
    scale = mp.mpf(1)
    for e in edges:
        scale *= _float_norm(e)
    return det_abs > mp.ldexp(scale, -(mode.bits // 2))


def check_simple(P: Polytope) -> bool:
    """True iff every vertex has d independent incident edges."""
    try:
        for i in range(P.n_vertices):
            tangent_cone(P, i)
    except NotSimpleError:
        return False
    return True
