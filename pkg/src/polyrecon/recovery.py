"""Projection recovery from scaled coefficients.

Two routes, cross-validating each other on exact data:

* Hankel/Prony: the minimal monic kernel vector of the Hankel matrix gives a
  polynomial whose roots are the projections <v_i, z> directly;
* Pade: the coefficients are the Taylor series of p(t)/q(t) with
  q(t) = prod_i (1 - t <v_i, z>), so the projections are reciprocals of the
  q-roots (a q-degree drop absorbs zero projections).

In float mode the sequence is first normalized by a growth-rate scale s
(c_k -> c_k / s^k, i.e. the same data for the polytope shrunk by s); this is
a pure reparametrization that keeps the graded Hankel/Pade systems from
drowning their small singular values, and all projections are rescaled by s
on the way out.  Conditioning diagnostics refer to the normalized systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp, mpc, mpf
from mpmath.libmp.libhyper import NoConvergence

from .errors import IllConditionedError, RecoveryError
from .linalg import dot, first_dependent_column, lstsq, singular_values, solve_full_pivot
from .moments import ScaledCoefficients
from .scalars import QComplex, ScalarMode, fraction_from_float, rationalize

__all__ = [
    "HankelMatrix",
    "PronyPolynomial",
    "PadeApproximant",
    "ProjectionSet",
    "build_hankel",
    "minimal_kernel_vector",
    "pade_denominator",
    "find_roots",
    "polyval",
    "projections_from_coefficients",
]


@dataclass(frozen=True)
class HankelMatrix:
    """Square Hankel matrix with entry(i, j) = c_{i+j}."""

    m: int
    coeffs: tuple

    def entry(self, i: int, j: int):
        return self.coeffs[i + j]

    def row(self, i: int):
        return [self.coeffs[i + j] for j in range(self.m)]

    def rows(self):
        return [self.row(i) for i in range(self.m)]

    def column(self, j: int):
        return [self.coeffs[i + j] for i in range(self.m)]


@dataclass(frozen=True)
class PronyPolynomial:
    """Monic polynomial a_0 + a_1 t + ... + a_{M-1} t^{M-1} + t^M."""

    degree: int
    coefficients: tuple  # a_0..a_{M-1}; leading 1 implicit

    def full_coefficients(self):
        one = Fraction(1) if not self.coefficients or isinstance(
            self.coefficients[0], (Fraction, QComplex)) else mp.mpf(1)
        return list(self.coefficients) + [one]


@dataclass(frozen=True)
class PadeApproximant:
    """p(t)/q(t) with q(0) = 1."""

    numerator: tuple
    denominator: tuple  # b_0 = 1, b_1..b_m

    @property
    def num_degree(self) -> int:
        return len(self.numerator) - 1

    @property
    def den_degree(self) -> int:
        return len(self.denominator) - 1


@dataclass(frozen=True)
class ProjectionSet:
    """Recovered projection multiset plus recovery diagnostics."""

    values: tuple
    estimated_N: int
    diagnostics: dict = field(default_factory=dict)


def build_hankel(c, m: int) -> HankelMatrix:
    seq = tuple(c.c) if isinstance(c, ScaledCoefficients) else tuple(c)
    if len(seq) < 2 * m - 1:
        raise RecoveryError(f"need 2m-1 coefficients to build an m={m} Hankel matrix")
    return HankelMatrix(m=m, coeffs=seq[: 2 * m - 1])


def _is_float_data(seq) -> bool:
    return any(isinstance(x, (mpf, mpc)) for x in seq)


def _scale_estimate(seq):
    """Growth rate of |c_k| ~ A s^k, estimated from the top half of the data."""
    s = mp.mpf(1)
    for k in range(max(1, len(seq) // 2), len(seq)):
        mag = abs(seq[k])
        if mag > 0:
            s = max(s, mag ** (mp.mpf(1) / k))
    return s


def _normalize(seq, s):
    out = []
    p = mp.mpf(1)
    for x in seq:
        out.append(x / p)
        p = p * s
    return out


def minimal_kernel_vector(H: HankelMatrix, mode: ScalarMode):
    """Smallest M with (a_0..a_{M-1}, 1, 0, ..) in Ker(H); returns (M, a).

    Exact mode finds the first dependent Hankel column by exact elimination;
    float mode takes the numerical rank (singular values above
    2^(-bits/2) * ||H||) and solves the leading columns in least squares.
    """
    M, a, _ = _kernel_with_diag(H, mode)
    return M, a


def _kernel_with_diag(H: HankelMatrix, mode: ScalarMode):
    m = H.m
    if mode.is_exact:
        cols = [H.column(j) for j in range(m)]
        hit = first_dependent_column(cols)
        if hit is None:
            raise RecoveryError("cannot determine N: Hankel matrix has full rank")
        M, combo, clean = hit
        if M == 0:
            raise RecoveryError("cannot determine N: zero coefficient sequence")
        if not clean:
            raise RecoveryError("cannot determine N: inconsistent rank pattern")
        zero = cols[0][0] * 0
        a = [combo.get(i, zero) for i in range(M)]
        return M, a, {"hankel_N": M, "exact": True}
    with mode.context():
        sv = singular_values(H.rows())
        if not sv or sv[0] == 0:
            raise RecoveryError("cannot determine N: zero coefficient sequence")
        tau = mp.ldexp(sv[0], -(mode.bits // 2))
        M = sum(1 for s in sv if s > tau)
        diag = {
            "hankel_N": M,
            "singular_values": [mp.nstr(s, 8) for s in sv],
            "rank_threshold": mp.nstr(tau, 8),
        }
        if M == 0:
            raise RecoveryError("cannot determine N: zero coefficient sequence")
        if M >= m:
            raise RecoveryError(
                "cannot determine N: no numerical kernel (need more coefficients)")
        A = [[H.entry(i, j) for j in range(M)] for i in range(m)]
        b = [-H.entry(i, M) for i in range(m)]
        a = lstsq(A, b)
        resid = max(abs(dot(row, a) - bi) for row, bi in zip(A, b))
        scale = max(abs(x) for x in b) if any(abs(x) > 0 for x in b) else mp.mpf(1)
        diag["kernel_residual"] = mp.nstr(resid, 8)
        if resid > mp.ldexp(scale, -(mode.bits // 4)):
            raise RecoveryError(
                f"cannot determine N: inconsistent kernel residual {mp.nstr(resid, 5)}")
        return M, a, diag


def pade_denominator(c, ell: int, m: int, mode: ScalarMode,
                     strict: bool = True):
    """Pade denominator from the linear system C x = y (C_ij = c_{l+i-j}).

    Returns (PadeApproximant, diagnostics).  The numerator follows from the
    convolution identity p = q*c truncated at degree ell.  With strict=True a
    float condition estimate above 2^(bits/2) raises IllConditionedError;
    pipeline callers keep strict=False and surface the estimate in their
    diagnostics instead.
    """
    seq = list(c.c) if isinstance(c, ScaledCoefficients) else list(c)
    n = ell + m
    if len(seq) < n + 1:
        raise RecoveryError("Pade needs c_0..c_{l+m}")
    zero = seq[0] * 0
    diag = {}
    if mode.is_exact:
        rows = [[seq[ell + 1 + i - j] if 0 <= ell + 1 + i - j <= n else zero
                 for j in range(1, m + 1)] for i in range(m)]
        y = [-seq[ell + 1 + i] for i in range(m)]
        x, _, _ = solve_full_pivot(rows, y, mode, want_cond=False)
        if x is None:
            raise IllConditionedError("Pade system ill-conditioned: singular")
        b = [seq[0] * 0 + 1] + list(x)
        scale = Fraction(1)
    else:
        with mode.context():
            s = _scale_estimate(seq)
            norm = _normalize(seq, s)
            zero = mp.mpf(0) * norm[0]
            rows = [[norm[ell + 1 + i - j] if 0 <= ell + 1 + i - j <= n else zero
                     for j in range(1, m + 1)] for i in range(m)]
            y = [-norm[ell + 1 + i] for i in range(m)]
            x, cond, resid = solve_full_pivot(rows, y, mode, want_cond=True)
            if x is None:
                raise IllConditionedError("Pade system ill-conditioned: singular")
            diag["condition"] = mp.nstr(cond, 8)
            diag["solve_residual"] = mp.nstr(resid, 8)
            if strict and cond > mp.ldexp(1, mode.bits // 2):
                raise IllConditionedError(
                    f"Pade system ill-conditioned: cond ~ {mp.nstr(cond, 5)}",
                    condition=cond)
            # denormalize: b_j = beta_j * s^j
            b = [mp.mpf(1)]
            p = mp.mpf(1)
            for j in range(m):
                p = p * s
                b.append(x[j] * p)
            scale = s
    num = []
    for k in range(ell + 1):
        acc = zero
        for j in range(0, min(k, m) + 1):
            acc = acc + b[j] * seq[k - j]
        num.append(acc)
    diag["scale"] = scale if isinstance(scale, Fraction) else mp.nstr(scale, 8)
    return PadeApproximant(numerator=tuple(num), denominator=tuple(b)), diag


def polyval(coeffs, x):
    """Horner evaluation, ascending coefficients."""
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _poly_norm_float(coeffs):
    return mp.sqrt(sum(abs(c) ** 2 for c in coeffs))


def find_roots(coeffs, mode: ScalarMode, max_denominator: int | None = None):
    """All roots (with multiplicity) of a polynomial, ascending coefficients.

    Exact mode: rational-root extraction on the primitive integer form when
    the end coefficients are small enough to factor, then a verified
    high-precision numeric pass (roots are rationalized with a bounded
    denominator and accepted only if they evaluate to exactly zero).  Float
    mode: scaled Durand-Kerner iteration, every root checked against the
    residual bound 2^(-bits/2) * ||poly|| * max(1, |root|)^deg.  Output is
    sorted by (real, imaginary) part.
    """
    coeffs = list(coeffs)
    while coeffs and _is_zero_coeff(coeffs[-1], mode):
        coeffs.pop()
    if not coeffs:
        raise ValueError("zero polynomial has no well-defined roots")
    if len(coeffs) == 1:
        return []
    if mode.is_exact:
        roots = _roots_exact(coeffs, max_denominator)
    else:
        roots = _roots_float(coeffs, mode)
    return sorted(roots, key=_root_key)


def _is_zero_coeff(x, mode: ScalarMode) -> bool:
    return x == 0


def _root_key(r):
    if isinstance(r, QComplex):
        return (r.re, r.im)
    if isinstance(r, mpc):
        return (r.real, r.imag)
    return (r, r * 0)


def _strip_zero_roots(coeffs):
    k = 0
    while k < len(coeffs) - 1 and coeffs[k] == 0:
        k += 1
    return coeffs[k:], k


def _roots_exact(coeffs, max_denominator):
    reduced, zeros = _strip_zero_roots(coeffs)
    zero = coeffs[0] * 0
    roots = [zero] * zeros
    deg = len(reduced) - 1
    if deg == 0:
        return roots
    if deg == 1:
        roots.append(-reduced[0] / reduced[1])
        return roots
    is_real = all(isinstance(c, (int, Fraction)) for c in reduced)
    if is_real:
        reduced = [Fraction(c) for c in reduced]
        int_coeffs = _primitive_integer(reduced)
        found = _rational_roots(int_coeffs)
        for r in found:
            reduced = _deflate(reduced, r)
            roots.append(r)
        deg = len(reduced) - 1
        if deg == 0:
            return roots
    roots.extend(_verified_numeric_roots(reduced, max_denominator))
    return roots


def _primitive_integer(coeffs):
    lcm = 1
    for c in coeffs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    return [v // g for v in ints] if g > 1 else ints


_FACTOR_LIMIT = 10 ** 6


def _divisors(n: int):
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            out.append(n // i)
        i += 1
    return sorted(set(out))


def _rational_roots(int_coeffs):
    """Rational-root-theorem candidates; only for small end coefficients."""
    const = int_coeffs[0]
    lead = int_coeffs[-1]
    if const == 0 or abs(const) > _FACTOR_LIMIT or abs(lead) > _FACTOR_LIMIT:
        return []
    found = []
    poly = [Fraction(c) for c in int_coeffs]
    for p in _divisors(const):
        for q in _divisors(lead):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                while len(poly) > 1 and polyval(poly, cand) == 0:
                    found.append(cand)
                    poly = _deflate(poly, cand)
    return found


def _deflate(coeffs, root):
    """Synthetic division by (t - root); assumes exact root."""
    out = [coeffs[-1]]
    for c in reversed(coeffs[1:-1]):
        out.append(c + out[-1] * root)
    out.reverse()
    return out


def _verified_numeric_roots(coeffs, max_denominator):
    """High-precision roots rationalized and verified to be exact."""
    deg = len(coeffs) - 1
    desc_exact = list(reversed(coeffs))
    for prec in (192, 384, 768, 1536, 3072):
        with mp.workprec(prec):
            desc = [_to_mpc(c) for c in desc_exact]
            try:
                approx = mp.polyroots(desc, maxsteps=200, extraprec=prec // 2)
            except NoConvergence:
                continue
        bound = max_denominator or 1 << (prec // 3)
        roots = []
        ok = True
        for r in approx:
            cand = _rationalize_root(r, bound)
            if polyval(coeffs, cand) != 0:
                ok = False
                break
            roots.append(cand)
        if ok and len(roots) == deg:
            return roots
    raise RecoveryError("root finding failed: exact verification did not converge")


def _to_mpc(c):
    if isinstance(c, QComplex):
        return mpc(mp.mpf(c.re.numerator) / c.re.denominator,
                   mp.mpf(c.im.numerator) / c.im.denominator)
    c = Fraction(c)
    return mp.mpf(c.numerator) / c.denominator


def _rationalize_root(r, bound):
    re = rationalize(mp.re(r), bound)
    im_f = mp.im(r)
    if im_f == 0:
        return re
    im = rationalize(im_f, bound)
    if im == 0:
        return re
    return QComplex(re, im)


def _roots_float(coeffs, mode: ScalarMode):
    bits = mode.bits
    with mode.context():
        reduced, zeros = _strip_zero_roots(coeffs)
        roots = [mp.mpf(0)] * zeros
        deg = len(reduced) - 1
        if deg == 0:
            return roots
        lead = reduced[-1]
        monic = [c / lead for c in reduced]
        # Fujiwara-style scaling keeps Durand-Kerner happy on graded data
        s = mp.mpf(1)
        for j in range(deg):
            mag = abs(monic[j])
            if mag > 0:
                s = max(s, mag ** (mp.mpf(1) / (deg - j)))
        scaled = [monic[j] * s ** (j - deg) for j in range(deg + 1)]
        desc = list(reversed(scaled))
        approx = None
        for steps in (100, 500, 2000):
            try:
                with mp.workprec(max(bits, 53) + 40):
                    approx = mp.polyroots(desc, maxsteps=steps,
                                          extraprec=max(bits, 53))
                break
            except NoConvergence:
                continue
        if approx is None:
            raise RecoveryError("root finding failed: no convergence")
        norm = _poly_norm_float(reduced)
        for u in approx:
            r = u * s
            if isinstance(r, mpc) and r.imag == 0:
                r = r.real
            resid = abs(polyval(reduced, r))
            tol = mp.ldexp(norm * max(mp.mpf(1), abs(r)) ** deg, -(bits // 2))
            if resid > tol:
                raise RecoveryError(
                    f"root finding failed: residual {mp.nstr(resid, 5)} above "
                    f"{mp.nstr(tol, 5)}")
            roots.append(+r if not isinstance(r, mpc) else mpc(+r.real, +r.imag))
        return roots


def projections_from_coefficients(c: ScaledCoefficients, method: str,
                                  mode: ScalarMode, n_max: int | None = None,
                                  max_denominator: int | None = None) -> ProjectionSet:
    """Projection multiset {<v_i, z>} from scaled coefficients.

    method "prony": roots of the minimal Hankel-kernel polynomial.
    method "pade": reciprocals of the q-roots, with a q-degree drop mapped to
    zero projections when the Hankel rank estimate asks for them.
    Real coefficient data yields real projections: roots that wander off the
    real axis (a float-precision failure mode) are dropped and reported in
    diagnostics["dropped_complex_roots"].
    """
    if method not in ("prony", "pade"):
        raise ValueError(f"unknown method {method!r}")
    seq = list(c.c)
    L = len(seq)
    if n_max is not None:
        need = 2 * n_max + 1 if method == "prony" else 2 * n_max
        if L < need:
            raise RecoveryError(
                f"need {need} coefficients for N_max={n_max} ({method}), got {L}")
    is_float = _is_float_data(seq)
    real_data = not any(isinstance(x, (QComplex, mpc)) for x in seq)
    diagnostics = {"method": method}
    with mode.context():
        if is_float:
            s = _scale_estimate(seq)
            work = _normalize(seq, s)
            diagnostics["normalization_scale"] = mp.nstr(s, 8)
        else:
            s = Fraction(1)
            work = seq
        m_full = (len(work) + 1) // 2
        H = build_hankel(work, m_full)
        N_est, kernel, kdiag = _kernel_with_diag(H, mode)
        diagnostics.update(kdiag)
        if method == "prony":
            poly = list(kernel) + [kernel[0] * 0 + 1]
            roots = find_roots(poly, mode, max_denominator)
            values = [r * s for r in roots] if is_float else roots
        else:
            ell, m_deg = N_est - 1, N_est
            pade, pdiag = pade_denominator(work, ell, m_deg, mode, strict=False)
            diagnostics.update(pdiag)
            den = list(pade.denominator)
            eff = len(den) - 1
            if mode.is_exact:
                while eff > 0 and den[eff] == 0:
                    eff -= 1
            else:
                dmax = max(abs(x) for x in den)
                tol = mp.ldexp(dmax, -(mode.bits // 2))
                while eff > 0 and abs(den[eff]) <= tol:
                    eff -= 1
            if eff < len(den) - 1:
                diagnostics["pade_degree_drop"] = len(den) - 1 - eff
            t_roots = find_roots(den[: eff + 1], mode, max_denominator)
            values = [s / r if is_float else 1 / r for r in t_roots]
            if N_est > len(values):
                zero = seq[0] * 0
                diagnostics["zero_projections_added"] = N_est - len(values)
                values.extend([zero] * (N_est - len(values)))
        if real_data:
            values, dropped = _filter_real(values, mode)
            if dropped:
                diagnostics["dropped_complex_roots"] = dropped
        values = sorted(values, key=_root_key)
    return ProjectionSet(values=tuple(values), estimated_N=len(values),
                         diagnostics=diagnostics)


def _filter_real(values, mode: ScalarMode):
    if mode.is_exact:
        real = [v for v in values if not isinstance(v, QComplex) or v.im == 0]
        return ([v.re if isinstance(v, QComplex) else v for v in real],
                len(values) - len(real))
    kept = []
    dropped = 0
    for v in values:
        if isinstance(v, mpc):
            tol = mp.ldexp(max(mp.mpf(1), abs(v.real)), -(mode.bits // 4))
            if abs(v.imag) <= tol:
                kept.append(v.real)
            else:
                dropped += 1
        else:
            kept.append(v)
    return kept, dropped
