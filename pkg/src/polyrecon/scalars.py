"""Scalar arithmetic models: exact rationals and k-bit binary floats.

Every other module is generic over a :class:`ScalarMode`.  In exact mode all
values are ``fractions.Fraction`` (complex values are :class:`QComplex`
pairs); results are error-free rational arithmetic.  In float mode values are
mpmath ``mpf``/``mpc`` numbers and every operation is carried out with the
mode's mantissa width (round-to-nearest-even), which mirrors working in
``RealField(bits)`` / ``ComplexField(bits)``.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpc, mpf, workprec

__all__ = [
    "ScalarMode",
    "QComplex",
    "trim_to_precision",
    "rationalize",
    "fraction_from_float",
    "re_part",
    "im_part",
    "is_complex_value",
]


class NonFiniteError(ValueError):
    """Raised when a non-finite float reaches an exact conversion."""


def _round_half_even(num: int, den: int) -> int:
    """Nearest integer to num/den (den > 0), ties to even."""
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q % 2 == 1):
        q += 1
    return q


def _floor_log2(x: Fraction) -> int:
    """Largest e with 2**e <= |x|, for x != 0."""
    n, d = abs(x.numerator), x.denominator
    e = n.bit_length() - d.bit_length()
    # n/d in [2**(e-1), 2**(e+1)); fix up by direct comparison
    if e >= 0:
        if n >= (d << (e + 1)):
            e += 1
        elif n < (d << e):
            e -= 1
    else:
        if (n << (-e - 1)) >= d:
            e += 1
        elif (n << -e) < d:
            e -= 1
    return e


def _trim_fraction(x: Fraction, bits: int) -> Fraction:
    if x == 0:
        return Fraction(0)
    sign = -1 if x < 0 else 1
    ax = abs(x)
    e = _floor_log2(ax)
    # scale so the mantissa lands in [2**(bits-1), 2**bits)
    shift = bits - 1 - e
    if shift >= 0:
        scaled = ax * (1 << shift)
    else:
        scaled = ax / (1 << -shift)
    m = _round_half_even(scaled.numerator, scaled.denominator)
    if m == (1 << bits):  # rounded up to the next binade
        m >>= 1
        e += 1
        shift -= 1
    if shift >= 0:
        out = Fraction(m, 1 << shift)
    else:
        out = Fraction(m << -shift)
    return sign * out


def fraction_from_float(x) -> Fraction:
    """Exact rational value of a binary float (mpf or Python float)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise NonFiniteError("non-finite input")
        return Fraction(x)
    # mpf: mantissa/exponent representation is exact; read it directly so an
    # ambient low precision never re-rounds a high-precision value
    if not mp.isfinite(x):
        raise NonFiniteError("non-finite input")
    sign, man, exp, _ = x._mpf_ if isinstance(x, mpf) else mp.mpf(x)._mpf_
    man = int(man)
    val = Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)
    return -val if sign else val


def _dyadic_to_mpf(x: Fraction):
    """Lossless Fraction -> mpf for dyadic rationals (power-of-two denominator)."""
    num = x.numerator
    den = x.denominator
    shift = den.bit_length() - 1
    assert den == (1 << shift), "not dyadic"
    with workprec(max(num.bit_length(), 1) + 8):
        return mp.ldexp(mp.mpf(num), -shift)


def trim_to_precision(x, bits: int):
    """Round x to a bits-wide mantissa, round-to-nearest-even.

    Idempotent at fixed ``bits``; exact inputs yield dyadic Fractions, float
    inputs stay floats.  Complex values are trimmed componentwise.
    """
    if bits < 8:
        raise ValueError("bits must be >= 8")
    if isinstance(x, QComplex):
        return QComplex(_trim_fraction(x.re, bits), _trim_fraction(x.im, bits))
    if isinstance(x, mpc):
        return mpc(trim_to_precision(x.real, bits), trim_to_precision(x.imag, bits))
    if isinstance(x, (Fraction, int)):
        return _trim_fraction(Fraction(x), bits)
    return _dyadic_to_mpf(_trim_fraction(fraction_from_float(x), bits))


def rationalize(x, denominator_bound: int) -> Fraction:
    """Best rational approximation with denominator <= bound.

    Continued-fraction convergents via Fraction.limit_denominator; the result
    minimizes |x - p/q| over all q <= bound.
    """
    if denominator_bound < 1:
        raise ValueError("denominator_bound must be positive")
    return fraction_from_float(x).limit_denominator(denominator_bound)


@dataclass(frozen=True)
class QComplex:
    """Complex number with exact rational components.

    <v, z> for complex z is the bilinear extension <v, z_re> + i <v, z_im>
    (real vectors are never conjugated).
    """

    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    # -- field arithmetic ------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QComplex):
            return other
        if isinstance(other, (int, Fraction)):
            return QComplex(Fraction(other), Fraction(0))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QComplex(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QComplex(self.re * o.re - self.im * o.im,
                        self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        denom = o.re * o.re + o.im * o.im
        if denom == 0:
            raise ZeroDivisionError("division by zero QComplex")
        return QComplex((self.re * o.re + self.im * o.im) / denom,
                        (self.im * o.re - self.re * o.im) / denom)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return QComplex(-self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = QComplex(Fraction(1), Fraction(0))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, QComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def abs2(self) -> Fraction:
        """Squared modulus (stays rational)."""
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "QComplex":
        return QComplex(self.re, -self.im)

    def __repr__(self):
        return f"QComplex({self.re!s}, {self.im!s})"


def re_part(x):
    if isinstance(x, QComplex):
        return x.re
    if isinstance(x, mpc):
        return x.real
    return x


def im_part(x):
    if isinstance(x, QComplex):
        return x.im
    if isinstance(x, mpc):
        return x.imag
    if isinstance(x, (int, Fraction)):
        return Fraction(0)
    return mp.mpf(0)


def is_complex_value(x) -> bool:
    return isinstance(x, (QComplex, mpc))


@dataclass(frozen=True)
class ScalarMode:
    """Arithmetic model: exact rationals (bits=None) or bits-wide floats."""

    bits: int | None = None
    complex_enabled: bool = True

    def __post_init__(self):
        if self.bits is not None and self.bits < 8:
            raise ValueError("float mode needs bits >= 8")

    @classmethod
    def exact(cls, complex_enabled: bool = True) -> "ScalarMode":
        return cls(None, complex_enabled)

    @classmethod
    def floating(cls, bits: int, complex_enabled: bool = True) -> "ScalarMode":
        return cls(bits, complex_enabled)

    @property
    def is_exact(self) -> bool:
        return self.bits is None

    def context(self):
        """Precision context; all float-mode arithmetic runs inside it."""
        if self.is_exact:
            return contextlib.nullcontext()
        return workprec(self.bits)

    # -- conversions into the mode's value domain ------------------------
    def from_fraction(self, x: Fraction):
        if self.is_exact:
            return Fraction(x)
        return _dyadic_to_mpf(_trim_fraction(Fraction(x), self.bits))

    def complex_value(self, re, im):
        if not self.complex_enabled:
            raise ValueError("complex values disabled in this mode")
        if self.is_exact:
            return QComplex(Fraction(re), Fraction(im))
        with self.context():
            return mpc(re, im)

    def convert(self, x):
        """Coerce an exact scalar (or pass a float-mode scalar through)."""
        if isinstance(x, QComplex):
            if self.is_exact:
                return x
            return mpc(self.from_fraction(x.re), self.from_fraction(x.im))
        if isinstance(x, (int, Fraction)):
            return self.from_fraction(Fraction(x))
        if self.is_exact:
            if isinstance(x, mpc):
                return QComplex(fraction_from_float(x.real), fraction_from_float(x.imag))
            return fraction_from_float(x)
        with self.context():
            return +x if not isinstance(x, mpc) else mpc(+x.real, +x.imag)

    def trim(self, x):
        """Measurement rounding: value rounded to the mode's mantissa width."""
        if self.is_exact:
            return x
        if isinstance(x, (mpf, mpc)):
            return self.convert(x)
        return self.convert(trim_to_precision(x, self.bits))

    def zero(self):
        return Fraction(0) if self.is_exact else mp.mpf(0)

    def one(self):
        return Fraction(1) if self.is_exact else mp.mpf(1)

    # -- file-format tag --------------------------------------------------
    def tag(self) -> str:
        return "rational" if self.is_exact else f"float:{self.bits}"

    @classmethod
    def from_tag(cls, tag: str) -> "ScalarMode":
        if tag == "rational":
            return cls.exact()
        if tag.startswith("float:"):
            return cls.floating(int(tag.split(":", 1)[1]))
        raise ValueError(f"unknown mode tag {tag!r}")
