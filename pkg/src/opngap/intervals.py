"""Certified interval arithmetic over exact rational endpoints.

Every quantity that enters a certified comparison is carried as a closed
interval whose endpoints are `fractions.Fraction` values.  Transcendental
constants (square roots, logarithms, arctangents, pi) come from bracketing
routines parametrized by a working precision in bits; the contract is
containment, never an exactness claim: the true real number lies inside the
returned interval for every precision.

Comparisons between intervals are three-valued.  `a.lt(b)` answers True or
False only when the interiors are disjoint enough to decide; otherwise it
answers None and the caller is expected to retry at a higher precision via
`refine`.  A strict comparison that stays unresolved at the precision cap
raises `UndecidableComparison` rather than guessing.

Internally the series evaluations run in fixed point: integers scaled by
2**bits with floor/ceil directed rounding.  This keeps endpoint denominators
at powers of two, so a 4096-bit evaluation does not drown in Fraction
normalization the way iterated exact rational series sums do.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Callable, Optional, Union

Rational = Union[int, Fraction]

DEFAULT_BITS = 96
DEFAULT_CAP_BITS = 8192


class UndecidableComparison(ArithmeticError):
    """Raised when a strict comparison is still ambiguous at the bit cap."""

    def __init__(self, what: str, bits: int):
        super().__init__(f"comparison undecidable at {bits} bits: {what}")
        self.what = what
        self.bits = bits


def _as_fraction(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


@dataclass(frozen=True)
class RationalInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_fraction(self.lo))
        object.__setattr__(self, "hi", _as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @classmethod
    def point(cls, x: Rational) -> "RationalInterval":
        f = _as_fraction(x)
        return cls(f, f)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "RationalInterval":
        o = _coerce(other)
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self) -> "RationalInterval":
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other) -> "RationalInterval":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "RationalInterval":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "RationalInterval":
        o = _coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalInterval":
        o = _coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError(f"divisor interval {o} contains zero")
        recips = RationalInterval(1 / o.hi, 1 / o.lo)
        return self * recips

    def __rtruediv__(self, other) -> "RationalInterval":
        return _coerce(other) / self

    def __abs__(self) -> "RationalInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RationalInterval(Fraction(0), max(-self.lo, self.hi))

    # -- queries ------------------------------------------------------------

    def width(self) -> Fraction:
        return self.hi - self.lo

    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Rational) -> bool:
        f = _as_fraction(x)
        return self.lo <= f <= self.hi

    def encloses(self, other: "RationalInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def hull(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    # Three-valued certified comparisons.  None means "not resolved at this
    # precision", not "unknown forever".
    def lt(self, other) -> Optional[bool]:
        o = _coerce(other)
        if self.hi < o.lo:
            return True
        if self.lo >= o.hi:
            return False
        return None

    def gt(self, other) -> Optional[bool]:
        return _coerce(other).lt(self)

    def is_positive(self) -> Optional[bool]:
        if self.lo > 0:
            return True
        if self.hi <= 0:
            return False
        return None

    def is_negative(self) -> Optional[bool]:
        if self.hi < 0:
            return True
        if self.lo >= 0:
            return False
        return None

    def approx(self, digits: int = 12) -> str:
        """Decimal rendering of the midpoint, for reports only."""
        scale = 10 ** digits
        m = self.mid()
        q, r = divmod(m.numerator * scale, m.denominator)
        if 2 * r >= m.denominator:
            q += 1
        sign = "-" if q < 0 else ""
        q = abs(q)
        return f"{sign}{q // scale}.{q % scale:0{digits}d}"

    def __repr__(self) -> str:
        return f"RationalInterval({self.lo!r}, {self.hi!r})"


def _coerce(x) -> RationalInterval:
    if isinstance(x, RationalInterval):
        return x
    return RationalInterval.point(x)


# -- fixed-point kernels ----------------------------------------------------
#
# All kernels work on non-negative integers scaled by S = 2**bits.  Lower
# bounds round every operation down, upper bounds round up, so the returned
# integer pair brackets the mathematical value at scale S.


def _cdiv(a: int, b: int) -> int:
    # ceil(a / b) for b > 0
    return -((-a) // b)


def _atanh_fixed(nlo: int, nhi: int, S: int) -> tuple[int, int]:
    # atanh(z) for z in [nlo/S, nhi/S], requires 0 <= z <= 2/3 so the
    # geometric tail factor 1/(1 - z^2) stays below 2.
    zsq_lo = (nlo * nlo) // S
    zsq_hi = _cdiv(nhi * nhi, S)
    plo, phi = nlo, nhi
    slo = shi = 0
    k = 0
    while True:
        slo += plo // (2 * k + 1)
        shi += _cdiv(phi, 2 * k + 1)
        plo = (plo * zsq_lo) // S
        phi = _cdiv(phi * zsq_hi, S)
        k += 1
        if phi // (2 * k + 1) == 0:
            shi += _cdiv(2 * phi, 2 * k + 1)
            break
    return slo, shi


def _atan_fixed(nlo: int, nhi: int, S: int) -> tuple[int, int]:
    # atan(z) for z in [nlo/S, nhi/S], 0 <= z <= 2/3.  Alternating series;
    # each signed term is accumulated with directed rounding and the cut-off
    # tail is covered by the magnitude of the first dropped term.
    zsq_lo = (nlo * nlo) // S
    zsq_hi = _cdiv(nhi * nhi, S)
    plo, phi = nlo, nhi
    slo = shi = 0
    k = 0
    while True:
        tlo = plo // (2 * k + 1)
        thi = _cdiv(phi, 2 * k + 1)
        if k % 2 == 0:
            slo += tlo
            shi += thi
        else:
            slo -= thi
            shi -= tlo
        plo = (plo * zsq_lo) // S
        phi = _cdiv(phi * zsq_hi, S)
        k += 1
        if phi // (2 * k + 1) == 0:
            tail = _cdiv(phi, 2 * k + 1)
            slo -= tail
            shi += tail
            break
    return slo, shi


_SERIES_ARG_MAX = Fraction(2, 3)


def _series_bracket(kernel, z: Fraction, bits: int) -> RationalInterval:
    if z < 0:
        inner = _series_bracket(kernel, -z, bits)
        return -inner
    if z > _SERIES_ARG_MAX:
        raise ValueError(f"series argument {z} outside [0, 2/3]")
    S = 1 << bits
    nlo = (z.numerator << bits) // z.denominator
    nhi = _cdiv(z.numerator << bits, z.denominator)
    slo, shi = kernel(nlo, nhi, S)
    return RationalInterval(Fraction(slo, S), Fraction(shi, S))


def atanh_interval(x, bits: int = DEFAULT_BITS) -> RationalInterval:
    """Bracket atanh over a point or interval; arguments restricted to |x| <= 2/3."""
    if isinstance(x, RationalInterval):
        lo = _series_bracket(_atanh_fixed, x.lo, bits)
        hi = _series_bracket(_atanh_fixed, x.hi, bits)
        return RationalInterval(lo.lo, hi.hi)
    return _series_bracket(_atanh_fixed, _as_fraction(x), bits)


def atan_interval(x, bits: int = DEFAULT_BITS) -> RationalInterval:
    """Bracket atan over a point or interval; arguments restricted to |x| <= 2/3."""
    if isinstance(x, RationalInterval):
        lo = _series_bracket(_atan_fixed, x.lo, bits)
        hi = _series_bracket(_atan_fixed, x.hi, bits)
        return RationalInterval(lo.lo, hi.hi)
    return _series_bracket(_atan_fixed, _as_fraction(x), bits)


def sqrt_interval(x, bits: int = DEFAULT_BITS) -> RationalInterval:
    """Bracket the square root of a non-negative rational or interval."""
    if isinstance(x, RationalInterval):
        if x.lo < 0:
            raise ValueError(f"sqrt of interval reaching below zero: {x}")
        return RationalInterval(
            _sqrt_lower(x.lo, bits), _sqrt_upper(x.hi, bits)
        )
    f = _as_fraction(x)
    if f < 0:
        raise ValueError(f"sqrt of negative rational {f}")
    return RationalInterval(_sqrt_lower(f, bits), _sqrt_upper(f, bits))


def _sqrt_lower(f: Fraction, bits: int) -> Fraction:
    # sqrt(n/d) = sqrt(n*d)/d; isqrt gives floor, exactness detected by squaring
    v = f.numerator * f.denominator << (2 * bits)
    r = isqrt(v)
    return Fraction(r, f.denominator << bits)

def _sqrt_upper(f: Fraction, bits: int) -> Fraction:
    v = f.numerator * f.denominator << (2 * bits)
    r = isqrt(v)
    if r * r != v:
        r += 1
    return Fraction(r, f.denominator << bits)


@lru_cache(maxsize=None)
def log2_interval(bits: int = DEFAULT_BITS) -> RationalInterval:
    """Bracket log 2 = 2 atanh(1/3)."""
    return 2 * atanh_interval(Fraction(1, 3), bits)


@lru_cache(maxsize=None)
def pi_interval(bits: int = DEFAULT_BITS) -> RationalInterval:
    """Bracket pi by Machin's formula 16 atan(1/5) - 4 atan(1/239)."""
    a = atan_interval(Fraction(1, 5), bits)
    b = atan_interval(Fraction(1, 239), bits)
    return 16 * a - 4 * b


def log_interval(x, bits: int = DEFAULT_BITS) -> RationalInterval:
    """Bracket the natural logarithm of a positive rational or interval.

    Range reduction: x = 2**k * t with t in [3/4, 3/2), then
    log t = 2 atanh((t-1)/(t+1)) with |(t-1)/(t+1)| <= 1/5.
    """
    if isinstance(x, RationalInterval):
        if x.lo <= 0:
            raise ValueError(f"log of interval reaching zero: {x}")
        lo = _log_fraction(x.lo, bits)
        hi = _log_fraction(x.hi, bits)
        return RationalInterval(lo.lo, hi.hi)
    f = _as_fraction(x)
    if f <= 0:
        raise ValueError(f"log of non-positive rational {f}")
    return _log_fraction(f, bits)


def _log_fraction(f: Fraction, bits: int) -> RationalInterval:
    k = f.numerator.bit_length() - f.denominator.bit_length()
    t = f / Fraction(2) ** k
    while t >= Fraction(3, 2):
        t /= 2
        k += 1
    while t < Fraction(3, 4):
        t *= 2
        k -= 1
    z = (t - 1) / (t + 1)
    body = 2 * atanh_interval(z, bits)
    if k == 0:
        return body
    return body + k * log2_interval(bits)


# -- refinement driver ------------------------------------------------------


def refine(
    decide: Callable[[int], Optional[bool]],
    *,
    start_bits: int = DEFAULT_BITS,
    cap_bits: int = DEFAULT_CAP_BITS,
    what: str = "interval comparison",
) -> bool:
    """Run a three-valued decision procedure at doubling precision.

    `decide(bits)` must recompute its intervals from scratch at the given
    precision and answer True, False, or None.  None past the cap raises
    UndecidableComparison: the caller learns the comparison is too tight for
    the configured budget instead of receiving a coin flip.
    """
    bits = start_bits
    while True:
        verdict = decide(bits)
        if verdict is not None:
            return verdict
        if bits >= cap_bits:
            raise UndecidableComparison(what, bits)
        bits = min(2 * bits, cap_bits) if cap_bits > bits else 2 * bits
