"""Forward moment engine.

Axial moments mu_j(z) = integral over P of <x,z>^j are produced two ways:

* the vertex formula  mu_j(z) = j!(-1)^d/(j+d)! * sum_v <v,z>^{j+d} D_v(z)
  with D_v(z) = |det K_v| / prod_k <w_k(v), z>, evaluated directly in real or
  complex arithmetic;
* an independent triangulation oracle that fans the polytope from its vertex
  centroid and integrates monomials over each simplex in closed form, used to
  cross-validate the vertex formula (never on the recovery path).

Scaled coefficients c_k = k!(-1)^d/(k-d)! * mu_{k-d} (zeros for k < d) form a
pure power sum sum_v <v,z>^k D_v(z), which is what the recovery algorithms
consume.  Measurement precision enters exactly once: the provider trims each
moment to the mode's mantissa width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpc

from .errors import DegenerateDirectionError
from .geometry import Polytope, tangent_cone
from .linalg import dot
from .scalars import QComplex, ScalarMode, fraction_from_float, is_complex_value

__all__ = [
    "Direction",
    "MomentSequence",
    "ScaledCoefficients",
    "dv",
    "axial_moment",
    "axial_moments",
    "verify_zero_identities",
    "scaled_coefficients",
    "moment_provider",
    "polytope_provider",
    "power_sum_coefficients",
    "integrate_monomial_oracle",
    "monomial_integrals",
    "oracle_axial_moment",
    "harmonic_check",
    "Polynomial",
]


@dataclass(frozen=True)
class Direction:
    """Projection direction; complex when an imaginary part is present."""

    z_re: tuple
    z_im: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "z_re", tuple(self.z_re))
        if self.z_im is not None:
            object.__setattr__(self, "z_im", tuple(self.z_im))
        if all(x == 0 for x in self.z_re):
            raise ValueError("z_re must be nonzero")
        if self.z_im is not None:
            if len(self.z_im) != len(self.z_re):
                raise ValueError("z_im dimension mismatch")
            if all(x == 0 for x in self.z_im):
                raise ValueError("z_im must be nonzero")
            if self._parallel():
                raise ValueError("z_im must not be parallel to z_re")

    def _parallel(self) -> bool:
        a, b = self.z_re, self.z_im
        return all(a[i] * b[j] - a[j] * b[i] == 0
                   for i in range(len(a)) for j in range(i + 1, len(a)))

    @property
    def dim(self) -> int:
        return len(self.z_re)

    @property
    def is_complex(self) -> bool:
        return self.z_im is not None


@dataclass(frozen=True)
class MomentSequence:
    """Moments mu_0..mu_K of one direction; the simulated measurement."""

    direction: Direction
    moments: tuple
    mode: ScalarMode

    @property
    def count(self) -> int:
        return len(self.moments)


@dataclass(frozen=True)
class ScaledCoefficients:
    """The vector c: d leading zeros, then scaled moments."""

    c: tuple
    dim: int

    def __len__(self) -> int:
        return len(self.c)


def _direction_values(direction: Direction, mode: ScalarMode):
    """Direction coordinates coerced into the mode's scalar domain."""
    conv = mode.convert
    zre = tuple(conv(Fraction(x) if isinstance(x, int) else x) for x in direction.z_re)
    if not direction.is_complex:
        return zre, None
    if not mode.complex_enabled:
        raise ValueError("complex direction with complex_enabled=False")
    zim = tuple(conv(Fraction(x) if isinstance(x, int) else x) for x in direction.z_im)
    return zre, zim


def _project(vec, zre, zim, mode: ScalarMode):
    re = dot(vec, zre)
    if zim is None:
        return re
    im = dot(vec, zim)
    if mode.is_exact:
        return QComplex(re, im)
    return mpc(re, im)


def _abs_value(x):
    if isinstance(x, QComplex):
        return x.abs2()  # exact surrogate, compare against squared tolerances
    return abs(x)


def _float_norm_sq(vec):
    return sum(mp.mpf(abs(x)) ** 2 for x in vec)


def dv(P: Polytope, vertex_index: int, direction: Direction,
       mode: ScalarMode | None = None):
    """Vertex coefficient |det K_v| / prod_k <w_k(v), z>.

    Invariant under positive rescaling of any edge vector.  Raises
    DegenerateDirectionError when a denominator vanishes (exact) or falls
    below the half-precision tolerance (float).
    """
    mode = mode or P.mode
    with mode.context():
        cone = tangent_cone(P, vertex_index)
        zre, zim = _direction_values(direction, mode)
        det_abs = mode.convert(cone.det_abs)
        denom = None
        for w in cone.edges:
            wv = tuple(mode.convert(x) for x in w)
            f = _project(wv, zre, zim, mode)
            if _vanishes(f, wv, zre, zim, mode):
                raise DegenerateDirectionError(
                    f"degenerate direction for vertex {vertex_index}")
            denom = f if denom is None else denom * f
        return det_abs / denom


def _vanishes(f, w, zre, zim, mode: ScalarMode) -> bool:
    if mode.is_exact:
        return f == 0
    znorm_sq = _float_norm_sq(zre) + (_float_norm_sq(zim) if zim else 0)
    tol_sq = mp.ldexp(_float_norm_sq(w) * znorm_sq, -mode.bits)
    mag_sq = abs(f) ** 2
    return mag_sq <= tol_sq


def _brion_factor(j: int, d: int) -> Fraction:
    return Fraction(math.factorial(j) * (-1) ** d, math.factorial(j + d))


def axial_moments(P: Polytope, js, direction: Direction,
                  mode: ScalarMode | None = None):
    """Axial moments for every j in js, sharing projection powers per vertex."""
    mode = mode or P.mode
    js = list(js)
    if not js:
        return []
    jmax = max(js)
    d = P.dim
    with mode.context():
        zre, zim = _direction_values(direction, mode)
        coeffs = []
        projections = []
        for i in range(P.n_vertices):
            coeffs.append(dv(P, i, direction, mode))
            vv = tuple(mode.convert(x) for x in P.vertices[i])
            projections.append(_project(vv, zre, zim, mode))
        sums = {}
        powers = [x ** d for x in projections]
        for j in range(jmax + 1):
            if j in set(js):
                acc = None
                for Dv, p in zip(coeffs, powers):
                    term = p * Dv
                    acc = term if acc is None else acc + term
                sums[j] = acc
            powers = [p * x for p, x in zip(powers, projections)]
        out = []
        for j in js:
            factor = mode.convert(_brion_factor(j, d))
            out.append(factor * sums[j])
        return out


def axial_moment(P: Polytope, j: int, direction: Direction,
                 mode: ScalarMode | None = None):
    """Single axial moment via the vertex formula."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    return axial_moments(P, [j], direction, mode)[0]


def verify_zero_identities(P: Polytope, direction: Direction,
                           mode: ScalarMode | None = None):
    """Residuals sum_v <v,z>^j D_v(z) for j = 0..d-1; exact zeros in exact mode."""
    mode = mode or P.mode
    d = P.dim
    with mode.context():
        zre, zim = _direction_values(direction, mode)
        residuals = []
        coeffs = [dv(P, i, direction, mode) for i in range(P.n_vertices)]
        projections = [_project(tuple(mode.convert(x) for x in v), zre, zim, mode)
                       for v in P.vertices]
        powers = [mode.convert(Fraction(1)) for _ in projections]
        for _ in range(d):
            acc = None
            for Dv, p in zip(coeffs, powers):
                term = p * Dv
                acc = term if acc is None else acc + term
            residuals.append(acc)
            powers = [p * x for p, x in zip(powers, projections)]
        return residuals


def power_sum_coefficients(P: Polytope, direction: Direction, count: int,
                           mode: ScalarMode | None = None):
    """First `count` Taylor coefficients of sum_v D_v(z) / (1 - t<v,z>)."""
    mode = mode or P.mode
    with mode.context():
        zre, zim = _direction_values(direction, mode)
        coeffs = [dv(P, i, direction, mode) for i in range(P.n_vertices)]
        projections = [_project(tuple(mode.convert(x) for x in v), zre, zim, mode)
                       for v in P.vertices]
        out = []
        powers = [mode.convert(Fraction(1)) for _ in projections]
        for _ in range(count):
            acc = None
            for Dv, p in zip(coeffs, powers):
                term = p * Dv
                acc = term if acc is None else acc + term
            out.append(acc)
            powers = [p * x for p, x in zip(powers, projections)]
        return out


def scaled_coefficients(ms: MomentSequence) -> ScaledCoefficients:
    """c_k = 0 for k < d, else k!(-1)^d/(k-d)! * mu_{k-d}."""
    d = ms.direction.dim
    mode = ms.mode
    cplx = ms.direction.is_complex
    with mode.context():
        if mode.is_exact:
            zero = QComplex(0, 0) if cplx else Fraction(0)
        else:
            zero = mpc(0) if cplx else mp.mpf(0)
        c = [zero] * d
        for i, mu in enumerate(ms.moments):
            k = d + i
            factor = mode.convert(
                Fraction(math.factorial(k) * (-1) ** d, math.factorial(i)))
            c.append(factor * mu)
    return ScaledCoefficients(c=tuple(c), dim=d)


def moment_provider(P: Polytope, direction: Direction, count: int,
                    mode: ScalarMode) -> MomentSequence:
    """Simulated measurement: mu_0..mu_{count-1}, trimmed once at this boundary.

    Moments are evaluated in the polytope's own arithmetic (exactly for
    rational polytopes) and then rounded to the target mode's mantissa width;
    precision never enters inside the forward formula.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if P.mode.is_exact:
        compute_mode = P.mode
    else:
        guard = max(P.mode.bits, mode.bits or 53) + 20
        compute_mode = ScalarMode.floating(guard)
    values = axial_moments(P, range(count), direction, compute_mode)
    trimmed = tuple(mode.trim(v) for v in values)
    return MomentSequence(direction=direction, moments=trimmed, mode=mode)


def polytope_provider(P: Polytope, mode: ScalarMode):
    """Provider closure used by the reconstruction driver."""
    def provide(direction: Direction, count: int) -> MomentSequence:
        return moment_provider(P, direction, count, mode)
    return provide


# ---------------------------------------------------------------------------
# Triangulation-integration oracle (independent of the vertex formula)
# ---------------------------------------------------------------------------

def _facet_vertex_sets(P: Polytope):
    nf = len(P.facets)
    sets = [set() for _ in range(nf)]
    for vi, tight in enumerate(P.vertex_facets):
        for f in tight:
            sets[f].add(vi)
    return [frozenset(s) for s in sets]


def _subfaces(face: frozenset, facet_sets, min_size: int):
    cands = set()
    for fs in facet_sets:
        w = face & fs
        if w != face and len(w) >= min_size:
            cands.add(w)
    return [w for w in cands
            if not any(w < other for other in cands)]


def _triangulate_face(face: frozenset, k: int, facet_sets, exact_vertices):
    """(k-1)-simplices (as sorted vertex-index tuples) triangulating a k-face."""
    if k == 1:
        if len(face) != 2:
            raise ValueError("edge face must have two vertices")
        return [tuple(sorted(face))]
    apex = min(face, key=lambda i: exact_vertices[i])
    simplices = []
    for sub in _subfaces(face, facet_sets, k):
        if apex in sub:
            continue
        for s in _triangulate_face(sub, k - 1, facet_sets, exact_vertices):
            simplices.append((apex,) + s)
    return simplices


def boundary_simplices(P: Polytope):
    """Deterministic triangulation of the boundary into (d-1)-simplices."""
    exact_vertices = [tuple(fraction_from_float(x) for x in v) for v in P.vertices]
    facet_sets = _facet_vertex_sets(P)
    out = []
    for fs in facet_sets:
        out.extend(_triangulate_face(fs, P.dim - 1, facet_sets, exact_vertices))
    return out


def _lambda_poly_pow(linear, power, nvars):
    """(sum_k linear[k] * lam_k)^power as {exponent tuple: int coeff}."""
    poly = {(0,) * nvars: 1}
    base = {}
    for k, coeff in enumerate(linear):
        if coeff:
            e = [0] * nvars
            e[k] = 1
            base[tuple(e)] = coeff
    for _ in range(power):
        nxt = {}
        for e1, c1 in poly.items():
            for e2, c2 in base.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                nxt[e] = nxt.get(e, 0) + c1 * c2
        poly = nxt
    return poly


def _poly_mul(p1, p2):
    out = {}
    for e1, c1 in p1.items():
        for e2, c2 in p2.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return out


def monomial_integrals(P: Polytope, max_degree: int):
    """Exact integrals of every monomial x^alpha with |alpha| <= max_degree.

    Fans the polytope from its vertex centroid over the boundary
    triangulation; each simplex integral uses the closed-form Dirichlet
    formula after clearing denominators.  Exact for rational (and dyadic
    float) vertex data.
    """
    d = P.dim
    exact_vertices = [tuple(fraction_from_float(x) for x in v) for v in P.vertices]
    n = len(exact_vertices)
    centroid = tuple(sum(v[k] for v in exact_vertices) / n for k in range(d))
    alphas = [a for deg in range(max_degree + 1) for a in _compositions(deg, d)]
    totals = {a: Fraction(0) for a in alphas}
    for simplex in boundary_simplices(P):
        pts = [centroid] + [exact_vertices[i] for i in simplex]
        _accumulate_simplex(pts, alphas, totals)
    return totals


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _accumulate_simplex(pts, alphas, totals):
    d = len(pts) - 1
    q = 1
    for p in pts:
        for x in p:
            q = q * x.denominator // math.gcd(q, x.denominator)
    U = [[int(x * q) for x in p] for p in pts]  # scaled integer vertices
    T = [[U[k + 1][i] - U[0][i] for i in range(d)] for k in range(d)]
    detT = _int_det(T)
    if detT == 0:
        return
    adetT = abs(detT)
    nvars = d + 1
    max_by_coord = [max(a[i] for a in alphas) for i in range(d)]
    coord_pows = []
    for i in range(d):
        linear = [U[k][i] for k in range(nvars)]
        pows = [{(0,) * nvars: 1}]
        for p in range(1, max_by_coord[i] + 1):
            pows.append(_poly_mul(pows[-1], _lambda_poly_pow(linear, 1, nvars)))
        coord_pows.append(pows)
    fact = math.factorial
    for a in alphas:
        poly = {(0,) * nvars: 1}
        for i in range(d):
            if a[i]:
                poly = _poly_mul(poly, coord_pows[i][a[i]])
        j = sum(a)
        s = sum(c * math.prod(fact(b) for b in e) for e, c in poly.items())
        totals[a] += Fraction(adetT * s, fact(j + d)) / Fraction(q) ** (j + d)


def _int_det(M):
    n = len(M)
    M = [row[:] for row in M]
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            det = -det
        det *= M[k][k]
        for i in range(k + 1, n):
            f = Fraction(M[i][k], M[k][k])
            M[i] = [M[i][j] - f * M[k][j] for j in range(n)]
    return det


def integrate_monomial_oracle(P: Polytope, exponents) -> Fraction:
    """Exact integral of x^exponents over P (triangulation, no vertex formula)."""
    exponents = tuple(exponents)
    if len(exponents) != P.dim or any(e < 0 for e in exponents):
        raise ValueError("exponents must be a d-tuple of nonnegative integers")
    return monomial_integrals(P, sum(exponents))[exponents]


def _multinomial(j: int, alpha) -> int:
    out = math.factorial(j)
    for a in alpha:
        out //= math.factorial(a)
    return out


def oracle_axial_moment(P: Polytope, j: int, direction: Direction,
                        integrals=None):
    """mu_j(z) by multinomial expansion over oracle monomial integrals.

    For complex directions the value is assembled from the two real
    polynomials g1, g2 with (  <x,z_re> + i <x,z_im> )^j = g1 + i*g2, each
    integrated monomial-by-monomial, so this path never touches complex
    arithmetic inside the integral.
    """
    d = P.dim
    if integrals is None:
        integrals = monomial_integrals(P, j)
    zre = [Fraction(x) if isinstance(x, int) else fraction_from_float(x)
           for x in direction.z_re]
    if not direction.is_complex:
        total = Fraction(0)
        for alpha in _compositions(j, d):
            coeff = _multinomial(j, alpha)
            zpow = math.prod(z ** a for z, a in zip(zre, alpha))
            total += coeff * zpow * integrals[alpha]
        return total
    zim = [Fraction(x) if isinstance(x, int) else fraction_from_float(x)
           for x in direction.z_im]
    g1 = Fraction(0)
    g2 = Fraction(0)
    for m in range(j + 1):
        mixed = _mixed_moment(j - m, m, zre, zim, integrals, d)
        term = math.comb(j, m) * mixed
        if m % 2 == 0:
            g1 += (-1) ** (m // 2) * term
        else:
            g2 += (-1) ** ((m - 1) // 2) * term
    return QComplex(g1, g2)


def _mixed_moment(p: int, q: int, a, b, integrals, d: int) -> Fraction:
    """integral of <x,a>^p <x,b>^q via monomial expansion."""
    total = Fraction(0)
    for alpha in _compositions(p, d):
        ca = _multinomial(p, alpha)
        apow = math.prod(x ** e for x, e in zip(a, alpha))
        if apow == 0:
            continue
        for beta in _compositions(q, d):
            cb = _multinomial(q, beta)
            bpow = math.prod(x ** e for x, e in zip(b, beta))
            if bpow == 0:
                continue
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            total += ca * cb * apow * bpow * integrals[gamma]
    return total


# ---------------------------------------------------------------------------
# Harmonic-moment check
# ---------------------------------------------------------------------------

class Polynomial:
    """Multivariate polynomial with exact rational coefficients."""

    def __init__(self, terms=None, nvars: int = 0):
        self.nvars = nvars
        self.terms = {e: Fraction(c) for e, c in (terms or {}).items() if c != 0}

    @classmethod
    def linear_form(cls, coeffs):
        d = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if c != 0:
                e = [0] * d
                e[i] = 1
                terms[tuple(e)] = Fraction(c)
        return cls(terms, d)

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Polynomial(out, max(self.nvars, other.nvars))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Polynomial({e: c * other for e, c in self.terms.items()}, self.nvars)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Polynomial(out, max(self.nvars, other.nvars))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Polynomial({(0,) * self.nvars: Fraction(1)}, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def laplacian(self) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            for i, ei in enumerate(e):
                if ei >= 2:
                    ne = list(e)
                    ne[i] -= 2
                    ne = tuple(ne)
                    out[ne] = out.get(ne, Fraction(0)) + c * ei * (ei - 1)
        return Polynomial(out, self.nvars)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "Polynomial(0)"
        bits = [f"{c}*x^{e}" for e, c in sorted(self.terms.items())]
        return "Polynomial(" + " + ".join(bits) + ")"


def harmonic_check(j: int, z_re, z_im):
    """Laplacian residuals of g1, g2 where (<x,z_re>+i<x,z_im>)^j = g1 + i*g2.

    Both residuals are the zero polynomial exactly when z_re, z_im are
    orthogonal with equal norm (and always for j <= 1).
    """
    d = len(z_re)
    A = Polynomial.linear_form([Fraction(x) for x in z_re])
    B = Polynomial.linear_form([Fraction(x) for x in z_im])
    g1 = Polynomial({}, d)
    g2 = Polynomial({}, d)
    for m in range(j + 1):
        term = math.comb(j, m) * (A ** (j - m)) * (B ** m)
        if m % 2 == 0:
            g1 = g1 + term * Fraction((-1) ** (m // 2))
        else:
            g2 = g2 + term * Fraction((-1) ** ((m - 1) // 2))
    return g1.laplacian(), g2.laplacian()
