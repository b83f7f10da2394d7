"""Exact integer arithmetic: primality, budgeted factoring, orders, sigma.

Primality is deterministic Miller-Rabin below the published 13-base
threshold and Baillie-PSW above it.  Compositeness is always witnessed;
primality above the threshold is only probable and is reported as such, so
callers that stamp certificates can distinguish the two.

Factoring never loops open-endedly.  Trial division by the small primes is
followed by perfect-power splitting and Brent's rho with a fixed iteration
budget; exhausting the budget raises FactorizationBudgetExceeded carrying
the partial factorization, which callers log as an explicit skip.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import gcd, isqrt

from .errors import DomainError, FactorizationBudgetExceeded

# ---------------------------------------------------------------------------
# small primes

_SMALL_LIMIT = 10_000


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for i in range(2, isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i, f in enumerate(flags) if f]


SMALL_PRIMES: tuple[int, ...] = tuple(_sieve(_SMALL_LIMIT))
_SMALL_SET = frozenset(SMALL_PRIMES)

# Verified deterministic range for the first 13 prime bases.
MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class Primality(enum.Enum):
    COMPOSITE = "composite"
    PRIME_DETERMINISTIC = "prime"
    PRIME_PROBABLE = "probable-prime"


def _mr_witness(n: int, a: int) -> bool:
    # True when a witnesses n composite
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise DomainError(f"Jacobi symbol needs odd positive n, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n


def _lucas_strong_prp(n: int) -> bool:
    # Strong Lucas test with Selfridge's parameters; n odd, > 2, non-square.
    D = 5
    while jacobi(D, n) != -1:
        if gcd(abs(D), n) not in (1, n):
            return False
        D = -D - 2 if D > 0 else -D + 2
    Q = (1 - D) // 4
    d = n + 1
    s = (d & -d).bit_length() - 1
    d >>= s

    # U_d, V_d by binary ladder, most significant bit first
    U, V, qk = 1, 1, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * qk) % n
        qk = qk * qk % n
        if bit == "1":
            U, V = (U + V) % n, (V + D * U) % n
            if U % 2:
                U += n
            if V % 2:
                V += n
            U, V = U // 2 % n, V // 2 % n
            qk = qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * qk) % n
        qk = qk * qk % n
        if V == 0:
            return True
    return False


def primality(n: int) -> Primality:
    """Classify n; deterministic up to MR_DETERMINISTIC_LIMIT, BPSW beyond."""
    if n < 2:
        return Primality.COMPOSITE
    if n <= _SMALL_LIMIT:
        return (
            Primality.PRIME_DETERMINISTIC if n in _SMALL_SET else Primality.COMPOSITE
        )
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return Primality.COMPOSITE
    if n < MR_DETERMINISTIC_LIMIT:
        for a in _MR_BASES:
            if _mr_witness(n, a):
                return Primality.COMPOSITE
        return Primality.PRIME_DETERMINISTIC
    if _mr_witness(n, 2):
        return Primality.COMPOSITE
    if is_square(n):
        return Primality.COMPOSITE
    if not _lucas_strong_prp(n):
        return Primality.COMPOSITE
    return Primality.PRIME_PROBABLE


def is_prime(n: int) -> bool:
    return primality(n) is not Primality.COMPOSITE


def next_prime_above(x: int) -> int:
    """Smallest prime strictly greater than x."""
    n = x + 1
    if n <= 2:
        return 2
    if n % 2 == 0:
        if n == 2:
            return 2
        n += 1
    while not is_prime(n):
        n += 2
    return n


# ---------------------------------------------------------------------------
# factoring


def integer_nth_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, k >= 1."""
    if n < 0 or k < 1:
        raise DomainError(f"nth root needs n >= 0, k >= 1, got {n}, {k}")
    if n in (0, 1) or k == 1:
        return n
    x = 1 << ((n.bit_length() - 1) // k + 1)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def perfect_power(n: int) -> tuple[int, int] | None:
    """(b, k) with n = b**k and k maximal, else None.  Requires n >= 2."""
    if n < 2:
        raise DomainError(f"perfect_power needs n >= 2, got {n}")
    for k in range(n.bit_length() - 1, 1, -1):
        b = integer_nth_root(n, k)
        if b**k == n:
            return b, k
    return None


def _brent_cycle(n: int, c: int, max_iters: int) -> tuple[int | None, int]:
    # one parametrized Brent rho run; returns (nontrivial factor or None, cost)
    y, r, q, g = 2, 1, 1, 1
    iters = 0
    x = ys = y
    while g == 1 and iters < max_iters:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        iters += r
        k = 0
        while k < r and g == 1:
            ys = y
            step = min(128, r - k)
            for _ in range(step):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            iters += step
            g = gcd(q, n)
            k += step
        r <<= 1
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
    if 1 < g < n:
        return g, iters
    return None, iters


DEFAULT_RHO_BUDGET = 1_000_000


def factorize(n: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> dict[int, int]:
    """Full prime factorization {p: multiplicity} of n >= 1.

    Deterministic given (n, rho_budget).  Raises
    FactorizationBudgetExceeded once Brent iterations are used up.
    """
    if n < 1:
        raise DomainError(f"factorize needs n >= 1, got {n}")
    factors: dict[int, int] = {}
    for p in SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    if n == 1:
        return factors
    budget = rho_budget
    stack: list[tuple[int, int]] = [(n, 1)]
    while stack:
        m, mult = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors[m] = factors.get(m, 0) + mult
            continue
        pp = perfect_power(m)
        if pp is not None:
            b, k = pp
            stack.append((b, mult * k))
            continue
        d = None
        c = 1
        while d is None and budget > 0:
            d, used = _brent_cycle(m, c, min(budget, 1 << 17))
            budget -= used
            c += 1
        if d is None:
            partial = dict(factors)
            raise FactorizationBudgetExceeded(n, partial, m)
        stack.append((d, mult))
        stack.append((m // d, mult))
    return factors


def factored_value(factors: dict[int, int]) -> int:
    v = 1
    for p, e in factors.items():
        v *= p**e
    return v


# ---------------------------------------------------------------------------
# multiplicative structure


def sigma_pp(p: int, a: int) -> int:
    """sigma(p**a) = 1 + p + ... + p**a for prime p, a >= 1."""
    if not is_prime(p):
        raise DomainError(f"sigma_pp needs a prime base, got {p}")
    if a < 1:
        raise DomainError(f"sigma_pp needs exponent >= 1, got {a}")
    return (p ** (a + 1) - 1) // (p - 1)


def _carmichael_prime_power(p: int, e: int) -> int:
    if p == 2:
        if e == 1:
            return 1
        if e == 2:
            return 2
        return 1 << (e - 2)
    return p ** (e - 1) * (p - 1)


def mult_order(a: int, m: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> int:
    """Multiplicative order of a modulo m; requires gcd(a, m) = 1, m >= 2."""
    if m < 2:
        raise DomainError(f"mult_order needs modulus >= 2, got {m}")
    a %= m
    if gcd(a, m) != 1:
        raise DomainError(f"mult_order needs gcd(a, m) = 1, got a={a}, m={m}")
    if m == 2:
        return 1
    lam = 1
    for p, e in factorize(m, rho_budget).items():
        piece = _carmichael_prime_power(p, e)
        lam = lam * piece // gcd(lam, piece)
    order = lam
    for r in factorize(lam, rho_budget):
        while order % r == 0 and pow(a, order // r, m) == 1:
            order //= r
    return order


def lemma1_divides(q: int, p: int, c: int) -> bool:
    """Whether q divides sigma(p**c), by residue class rather than expansion.

    For p = 1 (mod q) the sum has c+1 unit terms, so q | sigma(p**c) iff
    q | c+1; otherwise sigma(p**c) = (p**(c+1) - 1)/(p - 1) vanishes mod q
    iff the order of p mod q divides c+1.
    """
    if not is_prime(q) or not is_prime(p):
        raise DomainError(f"lemma1_divides needs primes, got q={q}, p={p}")
    if q == p:
        raise DomainError("lemma1_divides needs distinct primes")
    if c < 1:
        raise DomainError(f"lemma1_divides needs c >= 1, got {c}")
    if p % q == 1:
        return (c + 1) % q == 0
    return (c + 1) % mult_order(p, q) == 0


# ---------------------------------------------------------------------------
# cyclotomic values and primitive prime factors


def _mobius(n: int) -> int:
    mu = 1
    for _, e in factorize(n).items():
        if e > 1:
            return 0
        mu = -mu
    return mu


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def cyclotomic_value(n: int, x: int) -> int:
    """Exact integer value of the n-th cyclotomic polynomial at x."""
    if n < 1:
        raise DomainError(f"cyclotomic index must be >= 1, got {n}")
    if n == 1:
        return x - 1
    if n == 2:
        return x + 1
    if x == 0:
        return 1
    if x == 1:
        f = factorize(n)
        return list(f)[0] if len(f) == 1 else 1
    if x == -1:
        # n = 1, 2 already handled; reduce by Phi_n(-y) identities
        if n % 2 == 1:
            return cyclotomic_value(2 * n, 1)
        if n % 4 == 2:
            return cyclotomic_value(n // 2, 1)
        return cyclotomic_value(n, 1)
    num = den = 1
    for d in _divisors(n):
        term = x ** (n // d) - 1
        mu = _mobius(d)
        if mu == 1:
            num *= term
        elif mu == -1:
            den *= term
    assert num % den == 0
    return num // den


def zsigmondy_primitive_factor(
    a: int, n: int, rho_budget: int = DEFAULT_RHO_BUDGET
) -> int | None:
    """Smallest prime P with ord_P(a) = n, i.e. P | a**n - 1 primitively.

    Returns None exactly in the classical exceptional cases: n = 1 with
    a = 2, n = 6 with a = 2, and n = 2 with a + 1 a power of two.
    """
    if a < 2 or n < 1:
        raise DomainError(f"needs a >= 2, n >= 1, got a={a}, n={n}")
    value = cyclotomic_value(n, a)
    candidates = sorted(factorize(value, rho_budget))
    for P in candidates:
        if a % P == 0:
            continue
        # ord_P(a) = n iff a^n = 1 and a^(n/l) != 1 for every prime l | n
        if pow(a, n, P) != 1:
            continue
        if all(pow(a, n // l, P) != 1 for l in factorize(n)):
            return P
    return None


# ---------------------------------------------------------------------------
# multiplicative dependence


def multiplicative_dependence(x1: int, x2: int) -> tuple[int, int, int] | None:
    """(g, a, b) with x1 = g**a, x2 = g**b when such g exists, else None.

    Two integers >= 2 are multiplicatively dependent iff they are powers of
    a common base, iff their maximal-root decompositions share the base.
    """
    if x1 < 2 or x2 < 2:
        raise DomainError(f"needs arguments >= 2, got {x1}, {x2}")

    def reduce(x: int) -> tuple[int, int]:
        pp = perfect_power(x)
        return pp if pp is not None else (x, 1)

    g1, a = reduce(x1)
    g2, b = reduce(x2)
    if g1 != g2:
        return None
    return g1, a, b


@dataclass(frozen=True)
class PrimePower:
    """A certified prime power p**a with odd p."""

    p: int
    a: int

    def __post_init__(self):
        if self.p == 2 or not is_prime(self.p):
            raise DomainError(f"PrimePower needs an odd prime, got {self.p}")
        if self.a < 0:
            raise DomainError(f"PrimePower needs a >= 0, got {self.a}")

    def value(self) -> int:
        return self.p**self.a

    def sigma(self) -> int:
        return 1 if self.a == 0 else sigma_pp(self.p, self.a)
