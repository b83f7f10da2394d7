#!/usr/bin/env python3
"""Empirical sharpness of the ratio window on the finite ranges.

The window claims 0.3791 < x |Y| / |X - Y sqrt D| < 0.6296 for every
integer x in (3^f, l^2).  Only five primes have a nonempty range; this
scans all of them with certified interval enclosures and reports how
much slack the extreme arguments leave on each side.  The quantity
hugs 1/2 everywhere, so both constants carry better than 0.11 of
slack; the tightest point of all is the smallest argument of the
smallest range, x = 28 at l = 19.
"""

import argparse
from fractions import Fraction

from opngap.cyclotomic import (
    RATIO_LOWER,
    RATIO_UPPER,
    field_discriminant,
    half_values,
    small_range,
)
from opngap.intervals import RationalInterval, sqrt_interval

SCAN_PRIMES = (19, 23, 29, 31, 37)


def scaled_ratio(l: int, x: int, bits: int = 128) -> RationalInterval:
    """Certified enclosure of x |Y| / |X - Y sqrt D| at one argument."""
    D = field_discriminant(l)
    X, Y = half_values(l, x)
    if D < 0:
        # the modulus of X - Y sqrt(D) is sqrt(X^2 + |D| Y^2)
        denom = sqrt_interval(Fraction(X * X - D * Y * Y), bits)
    else:
        denom = abs(X - sqrt_interval(D, bits) * Y)
    return RationalInterval.point(x * abs(Y)) / denom


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, default=128,
                    help="working precision for the enclosures")
    args = ap.parse_args()

    print(f"window: ({float(RATIO_LOWER)}, {float(RATIO_UPPER)})")
    for l in SCAN_PRIMES:
        lo, hi = small_range(l)
        worst_lo: tuple[Fraction, int] | None = None
        worst_hi: tuple[Fraction, int] | None = None
        for x in range(lo, hi + 1):
            iv = scaled_ratio(l, x, args.bits)
            if worst_lo is None or iv.lo < worst_lo[0]:
                worst_lo = (iv.lo, x)
            if worst_hi is None or iv.hi > worst_hi[0]:
                worst_hi = (iv.hi, x)
        assert worst_lo is not None and worst_hi is not None
        ok = worst_lo[0] > RATIO_LOWER and worst_hi[0] < RATIO_UPPER
        print(f"l={l}: {hi - lo + 1} arguments in [{lo}, {hi}]"
              f"  ({'inside' if ok else 'VIOLATED'})")
        print(f"  min x*ratio {float(worst_lo[0]):.6f} at x={worst_lo[1]}"
              f"  lower slack {float(worst_lo[0] - RATIO_LOWER):.6f}")
        print(f"  max x*ratio {float(worst_hi[0]):.6f} at x={worst_hi[1]}"
              f"  upper slack {float(RATIO_UPPER - worst_hi[0]):.6f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
