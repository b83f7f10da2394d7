"""Euler-form analysis: the S/T/U partition and the resulting r bounds.

An odd perfect number in Euler form is p**alpha times a product of
q_i**(2 beta) with one shared beta.  Everything here works on arbitrary
Euler-shaped inputs, perfect or not: no odd perfect number is available
to test with, so perfectness is always an explicit, checkable flag and
never a hidden assumption.  The partition machinery needs only exact
arithmetic on the factored form; divisibility and multiplicity inside
sigma(q**(2 beta)) are decided through multiplicative orders and the
lifting-the-exponent identity rather than by materializing huge sigmas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

from .arith import (
    factorize,
    is_prime,
    mult_order,
    sigma_pp,
    zsigmondy_primitive_factor,
)
from .errors import DomainError

BETA_GATE = 9  # analysis below this beta is handled by prior exclusions


@dataclass(frozen=True)
class EulerFormNumber:
    """p**alpha * prod(q_i**(2 beta)) with p = alpha = 1 (mod 4).

    The special prime p carries the odd exponent; every other prime
    carries the one shared even exponent 2 beta.  beta_gate_ok reports
    whether beta is at least 9, the range the sharper bounds target;
    smaller beta is legal here and simply flagged.
    """

    p: int
    alpha: int
    qs: tuple[int, ...]
    beta: int

    def __post_init__(self):
        object.__setattr__(self, "qs", tuple(int(q) for q in self.qs))
        if not is_prime(self.p) or self.p % 4 != 1:
            raise DomainError(f"special prime must be 1 mod 4, got {self.p}")
        if self.alpha < 1 or self.alpha % 4 != 1:
            raise DomainError(
                f"special exponent must be 1 mod 4, got {self.alpha}"
            )
        if self.beta < 1:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.qs:
            raise DomainError("need at least one non-special prime")
        seen = set()
        for q in self.qs:
            if q == 2 or not is_prime(q):
                raise DomainError(f"non-special primes must be odd, got {q}")
            if q == self.p:
                raise DomainError(f"special prime {q} repeated among the q_i")
            if q in seen:
                raise DomainError(f"duplicate prime {q}")
            seen.add(q)

    @classmethod
    def from_pairs(cls, p: int, alpha: int, pairs) -> "EulerFormNumber":
        """Construct from explicit (q, exponent) pairs sharing one even
        exponent."""
        pairs = [(int(q), int(e)) for q, e in pairs]
        if not pairs:
            raise DomainError("need at least one (q, exponent) pair")
        exps = {e for _, e in pairs}
        if len(exps) != 1:
            raise DomainError(f"exponents must all agree, got {sorted(exps)}")
        (e,) = exps
        if e < 2 or e % 2 != 0:
            raise DomainError(f"shared exponent must be even >= 2, got {e}")
        return cls(p, alpha, tuple(q for q, _ in pairs), e // 2)

    @property
    def r(self) -> int:
        return len(self.qs)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((q, 2 * self.beta) for q in self.qs)

    @property
    def beta_gate_ok(self) -> bool:
        return self.beta >= BETA_GATE

    def omega(self) -> int:
        """Number of distinct prime factors."""
        return self.r + 1

    def value(self) -> int:
        return self.p**self.alpha * prod(q ** (2 * self.beta) for q in self.qs)

    def sigma(self) -> int:
        return sigma_pp(self.p, self.alpha) * prod(
            sigma_pp(q, 2 * self.beta) for q in self.qs
        )

    def is_perfect(self) -> bool:
        return self.sigma() == 2 * self.value()


# ---------------------------------------------------------------------------
# sigma divisibility without materializing sigma


def _valuation(n: int, q: int) -> int:
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


def sigma_valuation(qj: int, qi: int, c: int) -> int:
    """v_qj(sigma(qi**c)) for distinct odd primes, via orders.

    sigma(qi**c) = (qi**(c+1) - 1)/(qi - 1).  For odd qj dividing x - 1,
    v(x**n - 1) = v(x - 1) + v(n); otherwise qj divides x**n - 1 iff the
    order d of x divides n, and then v(x**n - 1) = v(x**d - 1) + v(n/d).
    Every quantity involved stays word-sized or close to it.
    """
    if qj == 2 or qi == 2 or not is_prime(qj) or not is_prime(qi):
        raise DomainError(f"need odd primes, got qj={qj}, qi={qi}")
    if qj == qi:
        raise DomainError("a prime never divides sigma of its own power")
    if c < 1:
        raise DomainError(f"need exponent >= 1, got {c}")
    if qi % qj == 1:
        return _valuation(c + 1, qj)
    d = mult_order(qi, qj)
    if (c + 1) % d != 0:
        return 0
    # v_qj(qi**d - 1) by direct lifting: test qj**2, qj**3, ... divisibility
    v = 1
    while pow(qi, d, qj ** (v + 1)) == 1:
        v += 1
    return v + _valuation((c + 1) // d, qj)


# ---------------------------------------------------------------------------
# choice of l and the partition


def choose_l(form: EulerFormNumber) -> tuple[int, int] | None:
    """Largest prime factor of 2 beta + 1 present among the q_i, with its
    index; None when no prime factor of 2 beta + 1 occurs there.

    Existence only needs asserting for genuine odd perfect numbers, so a
    None on synthetic input is a hypothesis failure worth surfacing, not
    an error.
    """
    for l in sorted(factorize(2 * form.beta + 1), reverse=True):
        if l in form.qs:
            return l, form.qs.index(l)
    return None


@dataclass(frozen=True)
class PartitionResult:
    """The four-way split of q-indices relative to l = q_{i0}.

    S holds the indices with q_i = 1 (mod l).  Everything else except i0
    goes to T or U by whether some q_j divides sigma(q_i**(2 beta)); for
    T members, f counts the S-prime divisors of that sigma with
    multiplicity, and delta counts the i with f(i) = 1.  gamma is the
    exponent when 2 beta + 1 is a power of l (else None), s the number of
    distinct prime factors of 2 beta + 1, and classical_r_bound the
    quantity 2 beta #S / (2**(s-1) - 1), defined when s > 1.
    """

    l: int
    beta: int
    i0: int
    S: frozenset[int]
    T: frozenset[int]
    U: frozenset[int]
    f: dict[int, int] = field(compare=False)
    delta: int = 0
    gamma: int | None = None
    s: int = 1
    classical_r_bound: Fraction | None = None

    @property
    def all_t_supported(self) -> bool:
        """Whether every T member has at least one S-prime inside its
        sigma, as must hold for genuine inputs."""
        return all(v >= 1 for v in self.f.values())

    def index_sets_partition(self, r: int) -> bool:
        whole = self.S | self.T | self.U | {self.i0}
        total = len(self.S) + len(self.T) + len(self.U) + 1
        return whole == frozenset(range(r)) and total == r


def partition_STU(
    form: EulerFormNumber, l: int, i0: int
) -> PartitionResult:
    """Split the q-indices into S, T, U around the pivot q_{i0} = l.

    Divisibility of sigma(q_i**(2 beta)) by each q_j is decided by the
    order criterion, so the sigmas are never built.  f is computed for T
    members only, matching where the counting argument uses it.
    """
    if not (0 <= i0 < form.r) or form.qs[i0] != l:
        raise DomainError(f"q_{i0} is not {l}")
    if not is_prime(l):
        raise DomainError(f"l={l} is not prime")
    c = 2 * form.beta
    S = frozenset(
        i for i, q in enumerate(form.qs) if i != i0 and q % l == 1
    )
    T_list, U_list, f = [], [], {}
    for i, qi in enumerate(form.qs):
        if i == i0 or i in S:
            continue
        divides_any = any(
            sigma_valuation(qj, qi, c) > 0
            for j, qj in enumerate(form.qs)
            if qj != qi
        )
        if divides_any:
            T_list.append(i)
            f[i] = sum(sigma_valuation(form.qs[j], qi, c) for j in S)
        else:
            U_list.append(i)

    n = 2 * form.beta + 1
    t, gamma = n, 0
    while t % l == 0:
        t //= l
        gamma += 1
    factors = factorize(n)
    s = len(factors)
    classical = (
        Fraction(2 * form.beta * len(S), 2 ** (s - 1) - 1) if s > 1 else None
    )
    return PartitionResult(
        l=l,
        beta=form.beta,
        i0=i0,
        S=S,
        T=frozenset(T_list),
        U=frozenset(U_list),
        f=f,
        delta=sum(1 for v in f.values() if v == 1),
        gamma=gamma if t == 1 else None,
        s=s,
        classical_r_bound=classical,
    )


def lemma2_primitive_predictions(
    qi: int, two_beta_plus_one: int, l: int
) -> list[tuple[int, int]]:
    """Primitive prime factors of Phi_{l d}(qi) for each divisor d of
    (2 beta + 1)/l, each of which is 1 (mod l).

    These are the primes that force sigma(qi**(2 beta)) to meet the
    q-list when 2 beta + 1 is composite, emptying U.
    """
    if two_beta_plus_one % l != 0:
        raise DomainError(f"{l} does not divide {two_beta_plus_one}")
    quotient = two_beta_plus_one // l
    out = []
    for d in sorted(_divisors(quotient)):
        n = l * d
        prime = zsigmondy_primitive_factor(qi, n)
        if prime is not None and prime % l == 1:
            out.append((n, prime))
    return out


def _divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorize(n).items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


# ---------------------------------------------------------------------------
# the counting bound on #T and the r bounds


@dataclass(frozen=True)
class TBoundReport:
    """Outcome of the #T counting chain on one instance.

    The chain is 2 #T - delta <= sum f <= 2 beta #S <= 4 beta**2 together
    with delta <= 2 #S and the headline #T <= 2 beta**2 + delta/2, the
    last compared as exact rationals (no floor is taken on delta/2).
    """

    t_count: int
    s_count: int
    delta: int
    f_sum: int
    beta: int
    headline: bool
    lower_chain: bool
    upper_chain: bool
    s_small: bool
    delta_small: bool

    @property
    def ok(self) -> bool:
        return (
            self.headline
            and self.lower_chain
            and self.upper_chain
            and self.s_small
            and self.delta_small
        )

    def __bool__(self) -> bool:
        return self.ok


def t_bound_check(res: PartitionResult, beta: int) -> TBoundReport:
    """Check the counting chain that caps #T for this partition."""
    t, s_count, delta = len(res.T), len(res.S), res.delta
    f_sum = sum(res.f.values())
    return TBoundReport(
        t_count=t,
        s_count=s_count,
        delta=delta,
        f_sum=f_sum,
        beta=beta,
        headline=Fraction(t) <= 2 * beta**2 + Fraction(delta, 2),
        lower_chain=2 * t - delta <= f_sum,
        upper_chain=f_sum <= 2 * beta * s_count,
        s_small=s_count <= 2 * beta,
        delta_small=delta <= 2 * s_count,
    )


def r_bound(beta: int, variant: str = "standard") -> int:
    """Cap on the number of non-special primes.

    standard: 2 beta**2 + 8 beta + 2.  seven: coefficient 8 improves to 7,
    valid only when 2 beta + 1 is composite or beta >= 29.
    """
    if beta < 1:
        raise DomainError(f"beta must be positive, got {beta}")
    if variant == "standard":
        return 2 * beta**2 + 8 * beta + 2
    if variant == "seven":
        if is_prime(2 * beta + 1) and beta < 29:
            raise DomainError(
                f"seven-variant needs composite 2 beta + 1 or beta >= 29, "
                f"got beta={beta}"
            )
        return 2 * beta**2 + 7 * beta + 2
    raise DomainError(f"unknown variant {variant!r}")


def classical_r_bound(beta: int) -> int:
    """The older cap 4 beta**2 + 2 beta + 2, kept for comparison."""
    if beta < 1:
        raise DomainError(f"beta must be positive, got {beta}")
    return 4 * beta**2 + 2 * beta + 2


def n_bound_exponents(beta: int) -> tuple[int, int]:
    """Inner exponents (new, classical) of the N < 2**4**e envelopes.

    Callers compare these exponents (log-log-2 scale), never N.  The new
    exponent is r_bound + 1, matching the omega-count envelope
    N < 2**4**omega; at tiny beta the classical exponent is smaller and
    both are reported as computed.
    """
    if beta < 1:
        raise DomainError(f"beta must be positive, got {beta}")
    return 2 * beta**2 + 8 * beta + 3, 4 * beta**2 + 2 * beta + 3


# ---------------------------------------------------------------------------
# abundancy


def abundancy_is_two(
    n: int, factors: dict[int, int] | None = None, rho_budget: int | None = None
) -> bool:
    """Exact test sigma(n) = 2 n.

    Accepts an optional full factorization (validated against n); without
    one the number is factored here, so genuinely hard n surface the
    factorization budget error rather than a guess.
    """
    if n < 1:
        raise DomainError(f"need a positive integer, got {n}")
    if n == 1:
        return False
    if factors is None:
        kwargs = {} if rho_budget is None else {"rho_budget": rho_budget}
        factors = factorize(n, **kwargs)
    else:
        if prod(p**e for p, e in factors.items()) != n:
            raise DomainError("supplied factorization does not multiply to n")
        if any(e < 1 or not is_prime(p) for p, e in factors.items()):
            raise DomainError("supplied factorization is not prime powers")
    sigma = prod(sigma_pp(p, e) for p, e in factors.items())
    return sigma == 2 * n
