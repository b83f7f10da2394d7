"""Sharded, resumable search for solutions of Phi_l(x) = p^m * q.

A solution is stored as one JSON line with the fixed key order
(l, x, p, m, q, certified, ts); p is null when the value is itself prime
(m = 0).  Records are re-derived from scratch on write and again on
load, so a store can only ever hold claims that reproduce.

The search walks prime x with x != 1 (mod l) through a range, factors
Phi_l(x) under an iteration budget and keeps exactly the p^m * q shapes.
Budget exhaustion is never silent: the skipped x becomes a structured
entry in a sidecar file next to the records.

Sharding splits the range into contiguous blocks.  Each shard owns a
record file and a checkpoint holding the last finished x; re-running a
finished shard is a no-op and an interrupted one resumes where it
stopped, because the checkpoint is rewritten after every x.  The merge
is single threaded, sorts by (l, x) and re-verifies everything, which
makes the final store independent of the shard count.

Timestamps honor SOURCE_DATE_EPOCH so that archival runs can be made
byte-reproducible; without it `ts` is the wall clock and two otherwise
identical runs differ only in that field.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

from .arith import DEFAULT_RHO_BUDGET, factorize, is_prime, next_prime_above
from .cyclotomic import phi_eval
from .errors import DomainError, FactorizationBudgetExceeded, InconsistencyError
from .quadfield import eq21_verify

RECORD_KEYS = ("l", "x", "p", "m", "q", "certified", "ts")


def make_ts() -> str:
    """ISO-8601 UTC timestamp, overridable through SOURCE_DATE_EPOCH."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.isoformat(timespec="seconds")


@dataclass(frozen=True)
class SolutionRecord:
    l: int
    x: int
    p: int | None
    m: int
    q: int
    certified: bool
    ts: str

    def payload(self) -> tuple:
        """Everything except the timestamp; the deterministic part."""
        return (self.l, self.x, self.p, self.m, self.q, self.certified)

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in RECORD_KEYS})

    @classmethod
    def from_json(cls, line: str) -> "SolutionRecord":
        obj = json.loads(line)
        if not isinstance(obj, dict) or tuple(obj) != RECORD_KEYS:
            raise InconsistencyError(
                f"record keys must be exactly {RECORD_KEYS}, got {line!r}"
            )
        return cls(**obj)

    def verify(self, recheck_certificate: bool = False) -> None:
        """Re-derive every stored claim; raise InconsistencyError otherwise.

        Checks primality of x, p and q, the residue classes mod l, the
        exact product Phi_l(x) = p^m * q, and the m = 0 convention
        (p null exactly when the value is prime).  With
        recheck_certificate the ideal-shape certificate behind the
        `certified` flag is recomputed as well.
        """
        problems = []
        if self.l < 3 or not is_prime(self.l):
            problems.append(f"l={self.l} is not an odd prime")
        if not is_prime(self.x):
            problems.append(f"x={self.x} is not prime")
        elif self.l >= 3 and is_prime(self.l) and self.x % self.l == 1:
            problems.append(f"x={self.x} is 1 mod {self.l}")
        if self.m < 0:
            problems.append(f"m={self.m} is negative")
        if (self.p is None) != (self.m == 0):
            problems.append(f"p={self.p} inconsistent with m={self.m}")
        if not is_prime(self.q):
            problems.append(f"q={self.q} is not prime")
        elif self.l >= 3 and is_prime(self.l) and self.q % self.l != 1:
            problems.append(f"q={self.q} is not 1 mod {self.l}")
        if self.m >= 1:
            if self.p is None or not is_prime(self.p):
                problems.append(f"p={self.p} is not prime")
            elif self.p % self.l != 1:
                problems.append(f"p={self.p} is not 1 mod {self.l}")
            if self.p == self.q:
                problems.append("p and q coincide")
        if not problems:
            value = phi_eval(self.l, self.x)
            claimed = (self.p**self.m if self.m >= 1 else 1) * self.q
            if value != claimed:
                problems.append(
                    f"Phi_{self.l}({self.x}) = {value}, claim gives {claimed}"
                )
            elif recheck_certificate:
                report = eq21_verify(self.l, self.x, self.p, self.m, self.q)
                if report.passed != self.certified:
                    problems.append(
                        f"certified={self.certified} but the certificate "
                        f"recomputes to {report.passed}"
                    )
        if problems:
            raise InconsistencyError("; ".join(problems))


@dataclass(frozen=True)
class SkipEntry:
    """A prime x the search could not settle under its budget."""

    l: int
    x: int
    reason: str

    def to_json(self) -> str:
        return json.dumps({"l": self.l, "x": self.x, "reason": self.reason})

    @classmethod
    def from_json(cls, line: str) -> "SkipEntry":
        obj = json.loads(line)
        return cls(l=obj["l"], x=obj["x"], reason=obj["reason"])


def classify_phi(
    l: int,
    x: int,
    rho_budget: int = DEFAULT_RHO_BUDGET,
    ts: str | None = None,
) -> SolutionRecord | None:
    """Factor Phi_l(x) and build a record iff the shape is p^m * q.

    None is a definite reject: a prime power with exponent >= 2 (such as
    Phi_5(3) = 11^2), three or more distinct primes, or two primes both
    repeated.  A factorization that cannot be completed raises
    FactorizationBudgetExceeded instead; the caller logs such x, it never
    drops them silently.
    """
    if l < 3 or not is_prime(l):
        raise DomainError(f"need an odd prime l, got {l}")
    if not is_prime(x):
        raise DomainError(f"search arguments are prime, got x={x}")
    if x % l == 1:
        raise DomainError(f"x={x} is 1 mod {l}, outside the searched class")
    value = phi_eval(l, x)
    factors = factorize(value, rho_budget)
    items = sorted(factors.items())
    if len(items) == 1:
        (a, e), = items
        if e != 1:
            return None
        p, m, q = None, 0, a
    elif len(items) == 2:
        (a, ea), (b, eb) = items
        if ea == 1 and eb == 1:
            # two simple primes: the smaller plays p, the larger q
            p, m, q = a, 1, b
        elif eb == 1:
            p, m, q = a, ea, b
        elif ea == 1:
            p, m, q = b, eb, a
        else:
            return None
    else:
        return None
    for r in factors:
        # x != 1 (mod l) forces every prime divisor into 1 (mod l); a
        # violation here is an arithmetic fault, not a reject
        if r % l != 1:
            raise InconsistencyError(
                f"prime {r} | Phi_{l}({x}) is not 1 mod {l}"
            )
    certified = eq21_verify(l, x, p, m, q).passed
    record = SolutionRecord(
        l=l, x=x, p=p, m=m, q=q, certified=certified,
        ts=ts if ts is not None else make_ts(),
    )
    record.verify()
    return record


def primes_in_range(lo: int, hi: int):
    """Yield the primes in [lo, hi] in increasing order."""
    x = lo - 1 if lo >= 3 else 1
    while True:
        x = next_prime_above(x)
        if x > hi:
            return
        yield x


# ---------------------------------------------------------------------------
# checkpoints and shard plumbing


CHECKPOINT_KEYS = ("l", "lo", "hi", "shard", "shards", "last_x")


@dataclass(frozen=True)
class SearchCheckpoint:
    """Progress marker for one shard: last_x is the last finished prime.

    A fresh shard starts at last_x = lo - 1.  The marker pins the exact
    job parameters, so a resume against a different range or shard
    layout is refused instead of silently mixing stores.
    """

    l: int
    lo: int
    hi: int
    shard: int
    shards: int
    last_x: int

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in CHECKPOINT_KEYS})

    @classmethod
    def from_json(cls, line: str) -> "SearchCheckpoint":
        obj = json.loads(line)
        if not isinstance(obj, dict) or tuple(obj) != CHECKPOINT_KEYS:
            raise InconsistencyError(
                f"checkpoint keys must be exactly {CHECKPOINT_KEYS}"
            )
        return cls(**obj)

    @property
    def completed(self) -> bool:
        return self.last_x >= self.hi

    def matches(self, job: "ShardJob") -> bool:
        return (
            self.l == job.l
            and self.lo == job.lo
            and self.hi == job.hi
            and self.shard == job.shard
            and self.shards == job.shards
        )


def shard_ranges(lo: int, hi: int, shards: int) -> list[tuple[int, int]]:
    """Split [lo, hi] into `shards` contiguous blocks of near-equal size."""
    if shards < 1:
        raise DomainError(f"need at least one shard, got {shards}")
    span = max(hi - lo + 1, 0)
    base, extra = divmod(span, shards)
    out = []
    start = lo
    for k in range(shards):
        size = base + (1 if k < extra else 0)
        out.append((start, start + size - 1))
        start += size
    return out


def shard_paths(out: str, shard: int) -> tuple[str, str, str]:
    """(records, checkpoint, skips) file paths for one shard of `out`."""
    stem = f"{out}.shard{shard}"
    return f"{stem}.jsonl", f"{stem}.ckpt", f"{stem}.skips"


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass(frozen=True)
class ShardJob:
    l: int
    lo: int
    hi: int
    shard: int
    shards: int
    out: str
    rho_budget: int = DEFAULT_RHO_BUDGET
    resume: bool = False
    max_steps: int | None = None


@dataclass(frozen=True)
class ShardOutcome:
    shard: int
    records: int
    skips: int
    last_x: int
    completed: bool


def run_shard(job: ShardJob) -> ShardOutcome:
    """Process one shard's range, checkpointing after every prime.

    With resume=False any previous output for this shard is discarded.
    With resume=True an existing checkpoint must match the job exactly
    and the walk continues from the prime after last_x; a completed
    shard is left untouched.  max_steps caps the number of primes
    processed in this call (the time-sliced mode the interruption tests
    drive); the checkpoint discipline makes stopping anywhere safe.
    """
    rec_path, ckpt_path, skip_path = shard_paths(job.out, job.shard)
    start = job.lo
    mode = "w"
    if job.resume and os.path.exists(ckpt_path):
        with open(ckpt_path, encoding="utf-8") as fh:
            ck = SearchCheckpoint.from_json(fh.read())
        if not ck.matches(job):
            raise DomainError(
                f"checkpoint {ckpt_path} belongs to a different job: {ck}"
            )
        start = ck.last_x + 1
        mode = "a"
    records = skips = 0
    if mode == "a":
        # carry forward the counts already on disk
        if os.path.exists(rec_path):
            with open(rec_path, encoding="utf-8") as fh:
                records = sum(1 for _ in fh)
        if os.path.exists(skip_path):
            with open(skip_path, encoding="utf-8") as fh:
                skips = sum(1 for _ in fh)
    last_x = start - 1
    steps = 0
    with open(rec_path, mode, encoding="utf-8", newline="\n") as recf, \
            open(skip_path, mode, encoding="utf-8", newline="\n") as skf:
        for x in primes_in_range(start, job.hi):
            if job.max_steps is not None and steps >= job.max_steps:
                break
            if x % job.l != 1:
                try:
                    record = classify_phi(job.l, x, job.rho_budget)
                except FactorizationBudgetExceeded as exc:
                    skf.write(SkipEntry(
                        l=job.l, x=x,
                        reason=f"factorization budget exceeded: {exc}",
                    ).to_json() + "\n")
                    skf.flush()
                    skips += 1
                else:
                    if record is not None:
                        recf.write(record.to_json() + "\n")
                        recf.flush()
                        records += 1
            last_x = x
            steps += 1
            _write_atomic(ckpt_path, SearchCheckpoint(
                l=job.l, lo=job.lo, hi=job.hi, shard=job.shard,
                shards=job.shards, last_x=last_x,
            ).to_json())
        else:
            last_x = job.hi
    _write_atomic(ckpt_path, SearchCheckpoint(
        l=job.l, lo=job.lo, hi=job.hi, shard=job.shard,
        shards=job.shards, last_x=last_x,
    ).to_json())
    return ShardOutcome(
        shard=job.shard, records=records, skips=skips,
        last_x=last_x, completed=last_x >= job.hi,
    )


# ---------------------------------------------------------------------------
# whole searches: run shards, then a deterministic merge


def load_records(path: str, verify: bool = True) -> list[SolutionRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = SolutionRecord.from_json(line)
            if verify:
                record.verify()
            out.append(record)
    return out


def write_records(path: str, records: list[SolutionRecord]) -> None:
    for record in records:
        record.verify()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")


def merge_shards(
    out: str, shards: int, keep_parts: bool = False
) -> tuple[int, int]:
    """Combine shard outputs into the final store, sorted by (l, x).

    Every record is re-verified on the way through.  Duplicate (l, x)
    pairs mean overlapping shards and raise.  Returns (records, skips).
    """
    records: list[SolutionRecord] = []
    skips: list[SkipEntry] = []
    for k in range(shards):
        rec_path, _, skip_path = shard_paths(out, k)
        records.extend(load_records(rec_path))
        if os.path.exists(skip_path):
            with open(skip_path, encoding="utf-8") as fh:
                skips.extend(
                    SkipEntry.from_json(line) for line in fh if line.strip()
                )
    records.sort(key=lambda r: (r.l, r.x))
    for a, b in zip(records, records[1:]):
        if (a.l, a.x) == (b.l, b.x):
            raise InconsistencyError(f"duplicate record at l={a.l}, x={a.x}")
    skips.sort(key=lambda s: (s.l, s.x))
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")
    skip_out = out + ".skips"
    if skips:
        with open(skip_out, "w", encoding="utf-8", newline="\n") as fh:
            for entry in skips:
                fh.write(entry.to_json() + "\n")
    elif os.path.exists(skip_out):
        os.remove(skip_out)
    if not keep_parts:
        for k in range(shards):
            for path in shard_paths(out, k):
                if os.path.exists(path):
                    os.remove(path)
    return len(records), len(skips)


@dataclass(frozen=True)
class SearchResult:
    l: int
    lo: int
    hi: int
    shards: int
    out: str
    records: int
    skips: int
    completed: bool


def run_search(
    l: int,
    lo: int,
    hi: int,
    out: str,
    shards: int = 1,
    rho_budget: int = DEFAULT_RHO_BUDGET,
    resume: bool = False,
    max_steps: int | None = None,
    parallel: bool = True,
) -> SearchResult:
    """Search [lo, hi] in `shards` blocks and merge into `out`.

    Shards own disjoint ranges and private files, so they can run in
    separate processes; the merge afterwards is single threaded.  If any
    shard stops early (max_steps), nothing is merged and the result says
    completed=False; rerunning with resume=True picks all shards up at
    their checkpoints.
    """
    if l < 3 or not is_prime(l):
        raise DomainError(f"need an odd prime l, got {l}")
    if lo < 2:
        lo = 2
    jobs = [
        ShardJob(
            l=l, lo=a, hi=b, shard=k, shards=shards, out=out,
            rho_budget=rho_budget, resume=resume, max_steps=max_steps,
        )
        for k, (a, b) in enumerate(shard_ranges(lo, hi, shards))
    ]
    if parallel and shards > 1:
        with ProcessPoolExecutor(max_workers=min(shards, os.cpu_count() or 1)) as pool:
            outcomes = list(pool.map(run_shard, jobs))
    else:
        outcomes = [run_shard(job) for job in jobs]
    if not all(o.completed for o in outcomes):
        return SearchResult(
            l=l, lo=lo, hi=hi, shards=shards, out=out,
            records=sum(o.records for o in outcomes),
            skips=sum(o.skips for o in outcomes),
            completed=False,
        )
    n_records, n_skips = merge_shards(out, shards)
    return SearchResult(
        l=l, lo=lo, hi=hi, shards=shards, out=out,
        records=n_records, skips=n_skips, completed=True,
    )
