"""Complex-plane matching and vertex assembly.

One general-position real direction z_re is fixed and paired with d-1
directions z_j; recovering the projections for the complex direction
z = z_re + i*z_j yields pairs (<v, z_re>, <v, z_j>) that are matched by
construction (real and imaginary part of the same root).  Sorting every
plane's pairs by the z_re component aligns vertex indices across planes, and
a d x d solve per vertex produces the coordinates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp

from .errors import (AlignmentError, DegenerateDirectionError, IllConditionedError,
                     PolyreconError, ReconstructionError, RecoveryError)
from .linalg import determinant, solve_square
from .moments import Direction, MomentSequence, scaled_coefficients
from .recovery import projections_from_coefficients
from .scalars import ScalarMode, im_part, re_part

__all__ = [
    "DirectionFrame",
    "MatchedProjections",
    "ReconstructionReport",
    "choose_direction_frame",
    "match_plane",
    "align_planes",
    "assemble_vertices",
    "reconstruct",
    "reconstruct_from_sequences",
]


@dataclass(frozen=True)
class DirectionFrame:
    """z_re plus d-1 companion directions; rows form an invertible matrix."""

    z_re: tuple
    z_others: tuple

    def __post_init__(self):
        rows = self.matrix()
        d = len(self.z_re)
        if len(rows) != d:
            raise ValueError("frame must contain d directions")
        if determinant([list(r) for r in rows], ScalarMode.exact()) == 0:
            raise ValueError("frame directions must be linearly independent")

    def matrix(self):
        return [tuple(Fraction(x) for x in self.z_re)] + [
            tuple(Fraction(x) for x in z) for z in self.z_others]


@dataclass(frozen=True)
class MatchedProjections:
    """Per-plane (p_re, p_j) pairs, index-aligned by ascending p_re."""

    planes: tuple  # tuple of tuples of (p_re, p_j) pairs
    consensus_re: tuple

    @property
    def n(self) -> int:
        return len(self.consensus_re)


@dataclass
class ReconstructionReport:
    vertices: list
    estimated_N: int
    mode: ScalarMode
    seed: int
    frame: DirectionFrame | None
    method: str
    plane_diagnostics: list = field(default_factory=list)
    attempts: int = 1
    distance: object | None = None


def choose_direction_frame(d: int, seed: int, coeff_range: int = 9,
                           max_retries: int = 100) -> DirectionFrame:
    """Small random integer directions, resampled until linearly independent."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    rng = random.Random(seed)
    for _ in range(max_retries):
        vecs = []
        for _ in range(d):
            v = tuple(rng.randint(-coeff_range, coeff_range) for _ in range(d))
            if any(v):
                vecs.append(v)
        if len(vecs) != d:
            continue
        rows = [[Fraction(x) for x in v] for v in vecs]
        if determinant(rows, ScalarMode.exact()) != 0:
            return DirectionFrame(z_re=vecs[0], z_others=tuple(vecs[1:]))
    raise ReconstructionError("could not sample an independent direction frame")


def _pair_key(pair):
    return (pair[0], pair[1])


def match_plane(provider, z_re, z_j, n_max: int, mode: ScalarMode,
                method: str = "pade"):
    """Matched (p_re, p_j) pairs for the complex plane z_re + i*z_j.

    Consumes 2*n_max + 1 scaled coefficients from the provider and splits
    every recovered complex projection into its real/imaginary parts, sorted
    ascending by the z_re component (ties by the z_j component).
    Returns (pairs, diagnostics).
    """
    direction = Direction(tuple(z_re), tuple(z_j))
    count = 2 * n_max + 1 - direction.dim
    if count < 1:
        raise ValueError("n_max too small for the dimension")
    seq = provider(direction, count)
    c = scaled_coefficients(seq)
    pset = projections_from_coefficients(c, method, mode, n_max=n_max)
    pairs = sorted(((re_part(x), im_part(x)) for x in pset.values), key=_pair_key)
    return pairs, pset.diagnostics


def align_planes(planes, mode: ScalarMode) -> MatchedProjections:
    """Check the per-plane sorted p_re lists agree and form their consensus.

    Exact mode demands exact equality; float mode takes the element-wise
    median and tolerates deviations up to 2^(-bits/4) * spread.  Coincident
    consensus values are frame degeneracies and raise AlignmentError.
    """
    if not planes:
        raise AlignmentError("no planes to align")
    counts = {len(p) for p in planes}
    if len(counts) != 1:
        raise AlignmentError(f"inconsistent N across planes: {sorted(counts)}")
    n = counts.pop()
    if n == 0:
        raise AlignmentError("empty projection lists")
    re_lists = [[p[i][0] for i in range(n)] for p in planes]
    if mode.is_exact:
        consensus = re_lists[0]
        for k, lst in enumerate(re_lists[1:], start=2):
            if lst != consensus:
                raise AlignmentError(f"plane alignment failed: plane {k}")
        for i in range(n - 1):
            if consensus[i] == consensus[i + 1]:
                raise AlignmentError(
                    "plane alignment failed: coincident projections on z_re")
        return MatchedProjections(planes=tuple(tuple(p) for p in planes),
                                  consensus_re=tuple(consensus))
    with mode.context():
        consensus = [_median([lst[i] for lst in re_lists]) for i in range(n)]
        spread = max(consensus) - min(consensus)
        if spread <= 0:
            raise AlignmentError("plane alignment failed: zero spread")
        tol = mp.ldexp(spread, -(mode.bits // 4))
        for k, lst in enumerate(re_lists, start=1):
            dev = max(abs(a - b) for a, b in zip(lst, consensus))
            if dev > tol:
                raise AlignmentError(
                    f"plane alignment failed: plane {k} deviates by {mp.nstr(dev, 5)}")
        for i in range(n - 1):
            if consensus[i + 1] - consensus[i] <= tol:
                raise AlignmentError(
                    "plane alignment failed: coincident projections on z_re")
    return MatchedProjections(planes=tuple(tuple(p) for p in planes),
                              consensus_re=tuple(consensus))


def _median(values):
    vals = sorted(values)
    k = len(vals)
    if k % 2 == 1:
        return vals[k // 2]
    return (vals[k // 2 - 1] + vals[k // 2]) / 2


def assemble_vertices(matched: MatchedProjections, frame: DirectionFrame,
                      mode: ScalarMode):
    """Per vertex index, solve [z_re; z_1; ..; z_{d-1}] v = projections."""
    rows = frame.matrix()
    d = len(rows)
    vertices = []
    with mode.context():
        for i in range(matched.n):
            rhs = [matched.consensus_re[i]]
            rhs += [matched.planes[j][i][1] for j in range(d - 1)]
            v = solve_square([list(r) for r in rows], rhs, mode)
            if v is None:
                raise ReconstructionError("singular frame matrix")
            vertices.append(tuple(v))
    return vertices


def reconstruct(provider, d: int, n_max: int, mode: ScalarMode, seed: int,
                method: str = "pade", max_retries: int = 20) -> ReconstructionReport:
    """Full pipeline: frame -> d-1 complex planes -> align -> assemble.

    Frames are resampled (budget max_retries) whenever a plane hits a
    degenerate direction, an ill-conditioned solve, a failed root extraction
    or misaligned projections.  Moment consumption is (d-1) * (2*n_max+1)
    coefficients.
    """
    rng = random.Random(seed)
    trail = []
    for attempt in range(1, max_retries + 1):
        frame_seed = rng.randrange(2 ** 32)
        try:
            frame = choose_direction_frame(d, frame_seed)
            planes = []
            diags = []
            for z_j in frame.z_others:
                pairs, diag = match_plane(provider, frame.z_re, z_j, n_max,
                                          mode, method)
                planes.append(pairs)
                diags.append({"z_re": frame.z_re, "z_im": z_j, **diag})
            matched = align_planes(planes, mode)
            vertices = assemble_vertices(matched, frame, mode)
        except (DegenerateDirectionError, RecoveryError, IllConditionedError,
                AlignmentError, ValueError) as exc:
            trail.append({"attempt": attempt, "error": f"{type(exc).__name__}: {exc}"})
            continue
        return ReconstructionReport(
            vertices=vertices, estimated_N=len(vertices), mode=mode, seed=seed,
            frame=frame, method=method, plane_diagnostics=diags, attempts=attempt)
    raise ReconstructionError("reconstruction failed: retry budget exhausted",
                              trail=trail)


def reconstruct_from_sequences(sequences, n_max: int, mode: ScalarMode,
                               method: str = "pade") -> ReconstructionReport:
    """Reconstruction from pre-measured complex moment sequences.

    Every sequence must be complex with a common z_re; their z_im parts form
    the frame.  No resampling is possible; degeneracies raise.
    """
    if not sequences:
        raise ReconstructionError("no moment sequences given")
    z_re = sequences[0].direction.z_re
    d = len(z_re)
    if len(sequences) != d - 1:
        raise ReconstructionError(f"need {d - 1} complex planes, got {len(sequences)}")
    z_others = []
    for seq in sequences:
        if not seq.direction.is_complex:
            raise ReconstructionError("moment sequences must use complex directions")
        if tuple(seq.direction.z_re) != tuple(z_re):
            raise ReconstructionError("all planes must share the same z_re")
        z_others.append(tuple(seq.direction.z_im))
    frame = DirectionFrame(z_re=tuple(z_re), z_others=tuple(z_others))
    planes = []
    diags = []
    for seq in sequences:
        c = scaled_coefficients(seq)
        pset = projections_from_coefficients(c, method, mode, n_max=n_max)
        pairs = sorted(((re_part(x), im_part(x)) for x in pset.values),
                       key=_pair_key)
        planes.append(pairs)
        diags.append({"z_re": tuple(z_re), "z_im": tuple(seq.direction.z_im),
                      **pset.diagnostics})
    matched = align_planes(planes, mode)
    vertices = assemble_vertices(matched, frame, mode)
    return ReconstructionReport(
        vertices=vertices, estimated_N=len(vertices), mode=mode, seed=0,
        frame=frame, method=method, plane_diagnostics=diags, attempts=1)
