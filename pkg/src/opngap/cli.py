"""Command line front end: certified verification, search, reporting.

`verify` runs one named check and exits 0 when the claim is certified,
1 when it is refuted (the counterexample is serialized to stdout) and
2 on usage errors, exhausted budgets, or a comparison that stayed
undecidable at the precision cap.  A PremiseError is a usage error in
this scheme: the input failed the hypotheses, the statement itself was
never tested.

`search` drives the sharded, checkpointed solution search from
`opngap.search`; `report` prints bound tables over a beta range and
chain verdicts over an l range, aligned for reading or as JSON lines.

Search stores default into the directory named by OPNGAP_OUT (falling
back to the working directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .arith import DEFAULT_RHO_BUDGET, next_prime_above
from .cyclotomic import (
    lemma3_largex_bounds,
    lemma3_ratio_check,
    lemma3_smallrange_verify,
)
from .errors import (
    DomainError,
    FactorizationBudgetExceeded,
    InconsistencyError,
    PremiseError,
)
from .gap import GapWitness, bound_chain, lemma4_verify, lemma5_verify
from .intervals import DEFAULT_CAP_BITS, UndecidableComparison
from .opn import classical_r_bound, n_bound_exponents, r_bound
from .quadfield import eq21_verify, faiziev_check
from .search import run_search

EXIT_VERIFIED = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2


def _range_arg(text: str) -> tuple[int, int]:
    """LO:HI inclusive; a bare integer is a one-element range."""
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            v = int(lo)
            return v, v
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected LO:HI with integers, got {text!r}"
        ) from None


def _witness_arg(text: str) -> tuple[tuple[int, int], ...]:
    """Comma-separated x:m pairs, e.g. 10:0,1001:0,10000000001:13."""
    try:
        pairs = []
        for part in text.split(","):
            x, _, m = part.partition(":")
            pairs.append((int(x), int(m)))
        return tuple(pairs)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated x:m pairs, got {text!r}"
        ) from None


def _need(args, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError(
            f"{args.target} requires {', '.join(missing)}"
        )


# ---------------------------------------------------------------------------
# verify targets; each returns (passed, detail)


def _v_lemma3_smallrange(args) -> tuple[bool, dict]:
    _need(args, "l")
    r = lemma3_smallrange_verify(args.l)
    return r.passed, {
        "l": r.l, "lo": r.lo, "hi": r.hi, "checked": r.checked,
        "failures": list(r.failures), "note": r.note,
    }


def _v_lemma3_ratio(args) -> tuple[bool, dict]:
    _need(args, "l", "x")
    r = lemma3_ratio_check(args.l, args.x)
    return r.passed, {
        "l": r.l, "x": r.x, "X": r.X, "Y": r.Y,
        "lower": str(r.lower), "upper": str(r.upper),
        "lower_ok": r.lower_ok, "upper_ok": r.upper_ok,
    }


def _spread(lo: int, hi: int, n: int) -> list[int]:
    """n integers spread evenly over [lo, hi], deduplicated, sorted."""
    if hi < lo:
        return []
    if n <= 1 or hi == lo:
        return [lo]
    return sorted({lo + round(i * (hi - lo) / (n - 1)) for i in range(n)})


def _v_lemma3_largex(args) -> tuple[bool, dict]:
    _need(args, "l")
    l = args.l
    if args.x is not None:
        xs = [args.x]
    else:
        _need(args, "range")
        lo, hi = args.range
        lo = max(lo, l * l)
        xs = _spread(lo, hi, args.samples)
    failures = [x for x in xs if not lemma3_largex_bounds(l, x).passed]
    return not failures, {
        "l": l, "checked": len(xs), "failures": failures,
        "first": xs[0] if xs else None, "last": xs[-1] if xs else None,
    }


def _v_lemma4(args) -> tuple[bool, dict]:
    _need(args, "l", "x1", "x2", "q")
    r = lemma4_verify(
        args.l, args.x1, args.x2, args.p, args.m1, args.m2, args.q,
        recheck=not args.no_recheck,
    )
    return r.passed, {
        "l": r.l, "x1": r.x1, "x2": r.x2, "p": r.p,
        "m1": r.m1, "m2": r.m2, "q": r.q, "f": r.f,
        "gap_holds": r.gap_holds, "pair_count": r.pair_count,
        "distinct_residues": r.distinct_residues,
        "residues_are_lth_roots": r.residues_are_lth_roots,
        "root_count": r.root_count, "engine_fires": r.engine_fires,
    }


def _v_lemma5(args) -> tuple[bool, dict]:
    _need(args, "l", "q", "witness")
    w = GapWitness(args.l, args.p, args.q, args.witness)
    r = lemma5_verify(
        w, recheck=not args.no_recheck, cap_bits=args.precision_cap
    )
    return r.passed, {
        "l": w.l, "p": w.p, "q": w.q,
        "solutions": [list(s) for s in w.solutions],
        "f": r.f, "gaps_hold": list(r.gaps_hold),
        "regulator_abs": r.regulator_abs.approx(10),
        "m3_threshold": r.m3_threshold.approx(10),
        "threshold_holds": r.threshold_holds,
        "branch_b_nonzero_holds": r.branch_b_nonzero_holds,
        "branch_b_zero_holds": r.branch_b_zero_holds,
    }


def _v_bound_chain(args) -> tuple[bool, dict]:
    _need(args, "l")
    r = bound_chain(args.l)
    milestones_ok = all(ok for _, ok in r.milestones)
    return r.verdict and milestones_ok, {
        "l": r.l, "f": r.f, "p_floor": r.p_floor,
        "r_prime": r.r_prime.approx(10),
        "steps": [list(row) for row in r.rows()],
        "threshold_loglog": r.threshold.value.approx(6),
        "milestones": [[name, ok] for name, ok in r.milestones],
        "verdict": r.verdict,
        "solutions_bound": (6 if r.l <= 53 else 5) if r.verdict else None,
    }


def _v_faiziev(args) -> tuple[bool, dict]:
    _need(args, "d")
    r = faiziev_check(args.d, cap_bits=args.precision_cap)
    return r.passed, {
        "D": r.D,
        "regulator": r.regulator.approx(10),
        "bound": r.bound.approx(10),
    }


def _v_eq21(args) -> tuple[bool, dict]:
    _need(args, "l", "x", "q")
    r = eq21_verify(args.l, args.x, args.p, args.m, args.q)
    return r.passed, {
        "l": r.l, "x": r.x, "p": r.p, "m": r.m, "q": r.q,
        "X": r.X, "Y": r.Y, "xy_gcd": r.xy_gcd,
        "content_trivial": r.content_trivial,
        "q_valuations": list(r.q_valuations),
        "p_valuations": list(r.p_valuations) if r.p_valuations else None,
        "xi_q_exponent": r.xi_q_exponent,
        "xi_p_exponent": r.xi_p_exponent,
        "flagged": r.flagged,
    }


_VERIFY = {
    "lemma3-smallrange": _v_lemma3_smallrange,
    "lemma3-ratio": _v_lemma3_ratio,
    "lemma3-largex": _v_lemma3_largex,
    "lemma4": _v_lemma4,
    "lemma5": _v_lemma5,
    "bound-chain": _v_bound_chain,
    "faiziev": _v_faiziev,
    "eq21": _v_eq21,
}


def _emit(args, verdict: str, detail: dict) -> None:
    if args.json:
        print(json.dumps(
            {"target": args.target, "verdict": verdict, **detail},
            default=str,
        ))
    else:
        print(f"{verdict}: {args.target}")
        print(json.dumps(detail, indent=2, default=str))


def cmd_verify(args) -> int:
    handler = _VERIFY[args.target]
    try:
        passed, detail = handler(args)
    except UndecidableComparison as exc:
        _emit(args, "undecidable", {
            "error": str(exc),
            "hint": "raise --precision-cap to push the refinement further",
        })
        return EXIT_USAGE
    except PremiseError as exc:
        _emit(args, "premises-not-met", {"failures": exc.failures})
        return EXIT_USAGE
    except FactorizationBudgetExceeded as exc:
        _emit(args, "resource-exhausted", {"error": str(exc)})
        return EXIT_USAGE
    except DomainError as exc:
        _emit(args, "usage-error", {"error": str(exc)})
        return EXIT_USAGE
    except InconsistencyError as exc:
        # a certified identity failed to reproduce: that is a refutation
        # with the failing derivation as witness
        _emit(args, "violated", {"witness": str(exc)})
        return EXIT_VIOLATED
    _emit(args, "verified" if passed else "violated", detail)
    return EXIT_VERIFIED if passed else EXIT_VIOLATED


# ---------------------------------------------------------------------------
# search


def _default_store(l: int, lo: int, hi: int) -> str:
    root = os.environ.get("OPNGAP_OUT", ".")
    return os.path.join(root, f"solutions_l{l}_{lo}-{hi}.jsonl")


def cmd_search(args) -> int:
    lo, hi = args.range
    out = args.out or _default_store(args.l, lo, hi)
    try:
        result = run_search(
            l=args.l, lo=lo, hi=hi, out=out, shards=args.shards,
            rho_budget=args.budget, resume=args.resume,
            max_steps=args.max_steps, parallel=not args.serial,
        )
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print(
            "interrupted; checkpoints are on disk, rerun with --resume",
            file=sys.stderr,
        )
        return EXIT_USAGE
    if not result.completed:
        print(
            f"paused after --max-steps; {result.records} records so far, "
            f"rerun with --resume to continue into {out}"
        )
        return EXIT_VERIFIED
    print(
        f"{result.records} records ({result.skips} skipped) "
        f"over x in [{lo}, {hi}] -> {out}"
    )
    return EXIT_VERIFIED


# ---------------------------------------------------------------------------
# report


def _beta_rows(lo: int, hi: int) -> list[dict]:
    rows = []
    for beta in range(max(lo, 1), hi + 1):
        exponent, classical_exponent = n_bound_exponents(beta)
        try:
            seven = r_bound(beta, variant="seven")
        except DomainError:
            seven = None
        rows.append({
            "beta": beta,
            "r_le": r_bound(beta),
            "exponent": exponent,
            "r_le_seven": seven,
            "classical_r": classical_r_bound(beta),
            "classical_exponent": classical_exponent,
        })
    return rows


def _l_rows(lo: int, hi: int) -> list[dict]:
    rows = []
    l = max(lo, 19) - 1
    while True:
        l = next_prime_above(l)
        if l > hi:
            break
        report = bound_chain(l)
        q3 = None
        if l <= 53:
            q3 = int(report.step("q3").bound.value.lo)
        rows.append({
            "l": l,
            "f": report.f,
            "p_floor": report.p_floor,
            "q2": int(report.step("q2").bound.value.lo),
            "q3": q3,
            "log_bound": report.steps[-2].bound.value.approx(4),
            "loglog_bound": report.final.bound.value.approx(4),
            "threshold": report.threshold.value.approx(4),
            "milestones_ok": all(ok for _, ok in report.milestones),
            "verdict": report.verdict,
            "solutions_bound": (6 if l <= 53 else 5) if report.verdict else None,
        })
    return rows


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def _render_table(rows: list[dict], columns: list[str]) -> str:
    cells = [[_cell(row.get(c)) for c in columns] for row in rows]
    widths = [
        max(len(col), *(len(row[i]) for row in cells))
        for i, col in enumerate(columns)
    ]
    lines = [
        "  ".join(col.ljust(w) for col, w in zip(columns, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in cells:
        lines.append(
            "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
        )
    return "\n".join(lines)


BETA_COLUMNS = [
    "beta", "r_le", "exponent", "r_le_seven",
    "classical_r", "classical_exponent",
]
L_COLUMNS = [
    "l", "f", "p_floor", "q2", "q3", "log_bound", "loglog_bound",
    "threshold", "milestones_ok", "verdict", "solutions_bound",
]


def cmd_report(args) -> int:
    if args.beta is None and args.l is None:
        print("error: report needs --beta LO:HI and/or --l LO:HI",
              file=sys.stderr)
        return EXIT_USAGE
    sections: list[tuple[list[dict], list[str]]] = []
    try:
        if args.beta is not None:
            sections.append((_beta_rows(*args.beta), BETA_COLUMNS))
        if args.l is not None:
            sections.append((_l_rows(*args.l), L_COLUMNS))
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    chunks = []
    for rows, columns in sections:
        if not rows:
            continue
        if args.json:
            chunks.append("\n".join(json.dumps(r) for r in rows))
        else:
            chunks.append(_render_table(rows, columns))
    text = "\n\n".join(chunks)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + ("\n" if text else ""))
    elif text:
        print(text)
    return EXIT_VERIFIED


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opngap",
        description="certified checks, solution search and bound reports "
                    "for Phi_l(x) = p^m q",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run one certified check")
    v.add_argument("target", choices=sorted(_VERIFY))
    v.add_argument("--l", type=int, help="the prime l")
    v.add_argument("--x", type=int)
    v.add_argument("--x1", type=int)
    v.add_argument("--x2", type=int)
    v.add_argument("--p", type=int)
    v.add_argument("--q", type=int)
    v.add_argument("--m", type=int, default=0)
    v.add_argument("--m1", type=int, default=0)
    v.add_argument("--m2", type=int, default=0)
    v.add_argument("--d", type=int, help="discriminant for faiziev")
    v.add_argument("--range", type=_range_arg, metavar="LO:HI")
    v.add_argument("--samples", type=int, default=50)
    v.add_argument("--witness", type=_witness_arg, metavar="X:M,X:M,X:M")
    v.add_argument("--no-recheck", action="store_true",
                   help="skip re-deriving the product identities")
    v.add_argument("--precision-cap", type=int, default=DEFAULT_CAP_BITS,
                   help="bit cap for interval refinement")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="sharded solution search")
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--range", type=_range_arg, required=True,
                   metavar="LO:HI")
    s.add_argument("--shards", type=int, default=1)
    s.add_argument("--budget", type=int, default=DEFAULT_RHO_BUDGET,
                   help="factoring iteration budget per x")
    s.add_argument("--out", help="records file (default under OPNGAP_OUT)")
    s.add_argument("--resume", action="store_true")
    s.add_argument("--serial", action="store_true",
                   help="run shards in-process instead of a process pool")
    s.add_argument("--max-steps", type=int, default=None,
                   help="stop each shard after this many primes")
    s.set_defaults(func=cmd_search)

    r = sub.add_parser("report", help="bound tables")
    r.add_argument("--beta", type=_range_arg, metavar="LO:HI",
                   help="exponent rows")
    r.add_argument("--l", type=_range_arg, metavar="LO:HI",
                   help="chain verdict rows over primes in the range")
    r.add_argument("--json", action="store_true")
    r.add_argument("--out", help="write the report to a file")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
