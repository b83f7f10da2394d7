#!/usr/bin/env python3
"""Headroom analysis for the certified lower-bound chains.

For each prime l in a range this prints the materialized chain steps
next to the classical exponent threshold and the margin by which the
final log-log bound clears it.  The chains get deeper as l grows, so
the headroom grows too; the narrowest case is l = 19, and even there
the bound lands an order of magnitude above the requirement.
"""

import argparse

from opngap.arith import next_prime_above
from opngap.gap import bound_chain


def _compact(n: int) -> str:
    return str(n) if n < 10**12 else f"{float(n):.3e}"


def _compact_iv(iv) -> str:
    mid = iv.mid()
    return iv.approx(4) if mid < 10**12 else f"{float(mid):.4e}"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=int, default=19)
    ap.add_argument("--hi", type=int, default=97)
    ap.add_argument("--bits", type=int, default=96,
                    help="starting precision for the certified steps")
    args = ap.parse_args()

    header = (f"{'l':>4}  {'f':>2}  {'p_floor':>7}  {'q2':>8}  {'q3':>10}"
              f"  {'final loglog':>16}  {'threshold':>11}"
              f"  {'headroom':>11}  verdict")
    print(header)
    print("-" * len(header))
    l = max(args.lo, 19) - 1
    while True:
        l = next_prime_above(l)
        if l > args.hi:
            break
        report = bound_chain(l, bits=args.bits)
        final = report.final.bound.value
        threshold = report.threshold.value
        headroom = final - threshold
        q2 = int(report.step("q2").bound.value.lo)
        q3 = "-"
        if l <= 53:
            q3 = _compact(int(report.step("q3").bound.value.lo))
        print(f"{l:>4}  {report.f:>2}  {report.p_floor:>7}  {q2:>8}"
              f"  {q3:>10}  {_compact_iv(final):>16}"
              f"  {threshold.approx(4):>11}  {_compact_iv(headroom):>11}"
              f"  {'ok' if report.verdict else 'FAIL'}")
    print()
    print("final loglog and threshold live on the log-log scale: a value v"
          " stands for a prime above exp(exp(v)).")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
