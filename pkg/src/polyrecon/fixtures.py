"""Built-in reference polytopes.

``paper8`` is the 8-vertex polyhedron used for the projection regression
values: its vertex matrix and adjacency are transcribed exactly, and its six
facet planes (small integer normals) are embedded so the fixture carries the
full incidence structure.  ``poly20`` is the 20-vertex, 12-facet benchmark
used by the precision sweep; its seed is pinned so the instance is stable.
"""

from __future__ import annotations

from fractions import Fraction as F

from .errors import PolyreconError
from .geometry import (Halfspace, Polytope, intersect_halfspaces,
                       random_simple_polytope_with_n_vertices)
from .scalars import ScalarMode

__all__ = ["paper8", "paper8_vertices", "unit_square", "unit_cube", "simplex",
           "poly20", "POLY20_SEED", "fixture", "FIXTURE_NAMES"]


# Columns v1..v8 of the reference vertex matrix.
PAPER8_VERTICES = (
    (F(17, 4), F(-14, 3), F(-7, 12)),
    (F(249, 121), F(-211, 121), F(1963, 121)),
    (F(-719, 74), F(-373, 74), F(426, 37)),
    (F(-66, 43), F(-267, 43), F(-108, 43)),
    (F(-82, 91), F(-219, 91), F(-148, 13)),
    (F(-1588, 133), F(414, 133), F(-46, 133)),
    (F(545, 37), F(765, 37), F(-85, 37)),
    (F(69, 7), F(59, 21), F(-41, 3)),
)

PAPER8_ADJACENCY = (
    (1, 3, 7),
    (0, 2, 6),
    (1, 3, 5),
    (0, 2, 4),
    (3, 5, 7),
    (2, 4, 6),
    (1, 5, 7),
    (0, 4, 6),
)

# Supporting planes <n, x> <= b recovered exactly from the vertex matrix.
PAPER8_FACETS = (
    ((-3, 4, -5), 50),
    ((-3, 5, 4), 50),
    ((-2, -2, -1), 18),
    ((1, -5, 1), 27),
    ((2, -5, -2), 33),
    ((5, -2, 1), 30),
)


def paper8_vertices():
    return PAPER8_VERTICES


def _reindex(P: Polytope, wanted_vertices) -> Polytope:
    perm = [P.vertices.index(v) for v in wanted_vertices]
    inv = {old: new for new, old in enumerate(perm)}
    return Polytope(
        dim=P.dim,
        vertices=tuple(P.vertices[i] for i in perm),
        facets=P.facets,
        vertex_facets=tuple(P.vertex_facets[i] for i in perm),
        adjacency=tuple(tuple(sorted(inv[j] for j in P.adjacency[i])) for i in perm),
        mode=P.mode,
    )


def paper8() -> Polytope:
    """The 8-vertex reference polyhedron, vertices in transcription order."""
    halfspaces = [Halfspace(tuple(F(x) for x in n), F(b)) for n, b in PAPER8_FACETS]
    P = intersect_halfspaces(halfspaces, ScalarMode.exact())
    P = _reindex(P, PAPER8_VERTICES)
    if P.adjacency != PAPER8_ADJACENCY:
        raise PolyreconError("paper8 fixture inconsistent with its adjacency matrix")
    return P


def unit_square() -> Polytope:
    hs = [Halfspace((F(-1), F(0)), F(0)), Halfspace((F(0), F(-1)), F(0)),
          Halfspace((F(1), F(0)), F(1)), Halfspace((F(0), F(1)), F(1))]
    return intersect_halfspaces(hs, ScalarMode.exact())


def unit_cube() -> Polytope:
    hs = []
    for k in range(3):
        lo = [F(0)] * 3
        lo[k] = F(-1)
        hi = [F(0)] * 3
        hi[k] = F(1)
        hs.append(Halfspace(tuple(lo), F(0)))
        hs.append(Halfspace(tuple(hi), F(1)))
    return intersect_halfspaces(hs, ScalarMode.exact())


def simplex(d: int) -> Polytope:
    hs = []
    for k in range(d):
        n = [F(0)] * d
        n[k] = F(-1)
        hs.append(Halfspace(tuple(n), F(0)))
    hs.append(Halfspace(tuple(F(1) for _ in range(d)), F(1)))
    return intersect_halfspaces(hs, ScalarMode.exact())


# Pinned so the 20-vertex benchmark polytope is identical everywhere.
POLY20_SEED = 7


def poly20() -> Polytope:
    return random_simple_polytope_with_n_vertices(3, 12, 20, POLY20_SEED)


FIXTURE_NAMES = ("paper8", "square", "cube", "simplex2", "simplex3", "simplex4",
                 "poly20")


def fixture(name: str) -> Polytope:
    if name == "paper8":
        return paper8()
    if name == "square":
        return unit_square()
    if name == "cube":
        return unit_cube()
    if name.startswith("simplex"):
        return simplex(int(name[len("simplex"):]))
    if name == "poly20":
        return poly20()
    raise KeyError(f"unknown fixture {name!r}")
