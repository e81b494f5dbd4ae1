"""Shared numeric context, exact Gaussian rationals and value (de)serialization.

All high-precision arithmetic in the package goes through the private mpmath
context ``mp`` defined here, so changing the working precision never touches
mpmath's global state.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction
from numbers import Rational

import mpmath
from mpmath import MPContext

DEFAULT_PREC_BITS = 256

mp = MPContext()
mp.prec = int(os.environ.get("PO_PREC_BITS", DEFAULT_PREC_BITS))

_MPC = (mpmath.mpc, mp.mpc)
_MPF = (mpmath.mpf, mp.mpf)

NEG_INF = mp.ninf
POS_INF = mp.inf


class ProxDiffError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ProxDiffError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(ProxDiffError, ValueError):
    """A documented precondition of the operation does not hold."""


class ConstructionError(ProxDiffError):
    """An object could not be built from the given data."""


class SolverRangeError(ProxDiffError, ArithmeticError):
    """A root bracket could not be found in the admissible range."""


def set_precision(bits: int) -> None:
    if bits < 64:
        raise PreconditionError(f"precision must be at least 64 bits, got {bits}")
    mp.prec = int(bits)


def get_precision() -> int:
    return mp.prec


# ---------------------------------------------------------------------------
# exact complex rationals


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Rational | int = 0, im: Rational | int = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return to_mp(self) + other
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return to_mp(self) * other
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return to_mp(self) / other
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return GaussianRational((self.re * o.re + self.im * o.im) / d,
                                (self.im * o.re - self.re * o.im) / d)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        return mp.sqrt(_frac_to_mpf(self.abs2()))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


I = GaussianRational(0, 1)


def is_exact(v) -> bool:
    return isinstance(v, (int, Fraction, GaussianRational))


def _frac_to_mpf(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


def to_mp(v):
    """Convert any supported scalar to an mpf (real) or mpc (complex)."""
    if isinstance(v, GaussianRational):
        if v.im == 0:
            return _frac_to_mpf(v.re)
        return mp.mpc(_frac_to_mpf(v.re), _frac_to_mpf(v.im))
    if isinstance(v, Fraction):
        return _frac_to_mpf(v)
    if isinstance(v, complex):
        return mp.mpc(v.real, v.imag)
    if isinstance(v, _MPC) and v.imag == 0:
        return mp.mpf(v.real)
    if isinstance(v, _MPC):
        return mp.mpc(v.real, v.imag)
    return mp.mpf(v)


def abs_mp(v):
    """|v| as an mpf, exact inputs are converted at working precision."""
    if isinstance(v, GaussianRational):
        return abs(v)
    if isinstance(v, (int, Fraction)):
        return abs(_frac_to_mpf(Fraction(v)))
    return mp.mpf(abs(v))


def log_abs(v):
    """ln|v| at working precision; ``-inf`` for zero."""
    if not v:
        return NEG_INF
    if isinstance(v, GaussianRational):
        return mp.log(_frac_to_mpf(v.abs2())) / 2
    if isinstance(v, (int, Fraction)):
        f = abs(Fraction(v))
        return mp.log(f.numerator) - mp.log(f.denominator)
    return mp.log(abs(v))


def is_zero(v) -> bool:
    return not v


# ---------------------------------------------------------------------------
# string formats

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


def parse_scalar(text):
    """Parse ``"p/q"``/integer strings exactly, anything else as an mpf."""
    if isinstance(text, bool):
        raise DomainError("booleans are not numbers")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return mp.mpf(text)
    if not isinstance(text, str):
        raise DomainError(f"cannot parse number from {text!r}")
    if _RATIONAL_RE.match(text):
        return Fraction(text.replace(" ", ""))
    try:
        return mp.mpf(text.strip())
    except (ValueError, TypeError) as exc:
        raise DomainError(f"cannot parse number from {text!r}") from exc


def parse_value(obj):
    """Parse a coefficient: a scalar string or a ``[re, im]`` pair."""
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2:
            raise DomainError(f"complex values need exactly two parts, got {obj!r}")
        re_, im_ = parse_scalar(obj[0]), parse_scalar(obj[1])
        if isinstance(re_, Fraction) and isinstance(im_, Fraction):
            return GaussianRational(re_, im_) if im_ else re_
        return mp.mpc(to_mp(re_), to_mp(im_))
    return parse_scalar(obj)


def format_real(x) -> str:
    if isinstance(x, (int, Fraction)):
        f = Fraction(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    x = mp.mpf(x)
    if mp.isinf(x) or mp.isnan(x):
        return str(x)
    return mp.nstr(x, mp.dps)


def format_value(v):
    """Inverse of :func:`parse_value`; complex values become ``[re, im]``."""
    if isinstance(v, GaussianRational):
        if v.im == 0:
            return format_real(v.re)
        return [format_real(v.re), format_real(v.im)]
    if isinstance(v, _MPC):
        if v.imag == 0:
            return format_real(v.real)
        return [format_real(v.real), format_real(v.imag)]
    if isinstance(v, complex):
        return [format_real(mp.mpf(v.real)), format_real(mp.mpf(v.imag))]
    return format_real(v)
