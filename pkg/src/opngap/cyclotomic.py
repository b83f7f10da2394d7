"""Exact cyclotomic integers and the two-class factorization of Phi_l.

For an odd prime l, the l-th cyclotomic polynomial splits over the quadratic
field of discriminant D = (-1)^((l-1)/2) * l into the two half products
taken over quadratic residues and nonresidues:

    psi+(x) = prod_{(i/l) = 1} (x - zeta^i),   psi- = its conjugate,

and 2 psi+ has the shape P(x) + Q(x) sqrt(D) with integer polynomials P, Q
satisfying P^2 - D Q^2 = 4 Phi_l.  Everything here is computed exactly in
Z[zeta_l]: the coefficients of psi+ are built by expanding the product, the
rational projections recover P and Q, and the defining identity is
re-verified on construction before a HalfFactorization is handed out.

Values X = P(x), Y = Q(x) then represent 4 Phi_l(x) = X^2 - D Y^2, the
entry point for the unit-group arguments downstream.  The ratio window
|Y / (X - Y sqrt(D))| in (0.3791/x, 0.6296/x) is checked by exact integer
comparisons: squaring both sides eliminates the radical, so no interval
arithmetic and no precision policy is involved in these verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .arith import cyclotomic_value, is_prime
from .errors import DomainError, InconsistencyError

# ---------------------------------------------------------------------------
# Z[zeta_l]


class CyclotomicInt:
    """Element of Z[zeta_l] on the power basis 1, zeta, ..., zeta^(l-2)."""

    __slots__ = ("l", "coeffs")

    def __init__(self, l: int, coeffs):
        if l < 3 or not is_prime(l):
            raise DomainError(f"cyclotomic order must be an odd prime, got {l}")
        coeffs = list(coeffs)
        if len(coeffs) > l:
            raise ValueError(f"too many coefficients for order {l}")
        coeffs += [0] * (l - len(coeffs))
        # zeta^(l-1) = -(1 + zeta + ... + zeta^(l-2))
        top = coeffs[l - 1]
        self.l = l
        self.coeffs = tuple(c - top for c in coeffs[: l - 1])

    @classmethod
    def zero(cls, l: int) -> "CyclotomicInt":
        return cls(l, [])

    @classmethod
    def one(cls, l: int) -> "CyclotomicInt":
        return cls(l, [1])

    @classmethod
    def zeta_power(cls, l: int, e: int) -> "CyclotomicInt":
        coeffs = [0] * l
        coeffs[e % l] = 1
        return cls(l, coeffs)

    def _check(self, other: "CyclotomicInt"):
        if self.l != other.l:
            raise ValueError("mixed cyclotomic orders")

    def __add__(self, other: "CyclotomicInt") -> "CyclotomicInt":
        self._check(other)
        return CyclotomicInt(
            self.l, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other: "CyclotomicInt") -> "CyclotomicInt":
        self._check(other)
        return CyclotomicInt(
            self.l, [a - b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __neg__(self) -> "CyclotomicInt":
        return CyclotomicInt(self.l, [-a for a in self.coeffs])

    def scale(self, n: int) -> "CyclotomicInt":
        return CyclotomicInt(self.l, [n * a for a in self.coeffs])

    def rot(self, e: int) -> "CyclotomicInt":
        """Multiply by zeta^e."""
        l = self.l
        acc = [0] * l
        for i, c in enumerate(self.coeffs):
            acc[(i + e) % l] += c
        return CyclotomicInt(l, acc)

    def __mul__(self, other: "CyclotomicInt") -> "CyclotomicInt":
        self._check(other)
        l = self.l
        acc = [0] * l
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        acc[(i + j) % l] += a * b
        return CyclotomicInt(l, acc)

    def galois(self, k: int) -> "CyclotomicInt":
        """Field automorphism zeta -> zeta^k, k not divisible by l."""
        if k % self.l == 0:
            raise DomainError("galois index divisible by the order")
        acc = [0] * self.l
        for i, c in enumerate(self.coeffs):
            acc[(i * k) % self.l] += c
        return CyclotomicInt(self.l, acc)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> int:
        if not self.is_rational():
            raise InconsistencyError(f"element not rational: {self.coeffs}")
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CyclotomicInt)
            and self.l == other.l
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.l, self.coeffs))

    def __repr__(self):
        return f"CyclotomicInt({self.l}, {list(self.coeffs)})"


def gauss_sum(l: int) -> CyclotomicInt:
    """tau = sum over t of (t/l) zeta^t; satisfies tau^2 = (-1)^((l-1)/2) l."""
    coeffs = [0] * l
    for t in range(1, l):
        coeffs[t] = 1 if pow(t, (l - 1) // 2, l) == 1 else -1
    return CyclotomicInt(l, coeffs)


def quadratic_residues(l: int) -> tuple[int, ...]:
    return tuple(sorted({pow(i, 2, l) for i in range(1, l)}))


def field_discriminant(l: int) -> int:
    """D = l for l = 1 (mod 4), D = -l for l = 3 (mod 4)."""
    if not is_prime(l) or l < 3:
        raise DomainError(f"need an odd prime, got {l}")
    return l if l % 4 == 1 else -l


# ---------------------------------------------------------------------------
# plain integer polynomials, ascending coefficient order


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_eval(coeffs, x: int) -> int:
    v = 0
    for c in reversed(coeffs):
        v = v * x + c
    return v


# ---------------------------------------------------------------------------
# the half factorization


@dataclass(frozen=True)
class HalfFactorization:
    """P, Q with P^2 - D Q^2 = 4 Phi_l, P monic-doubled, Q normalized to
    leading coefficient +1.  Coefficients ascending.  Instances only exist
    after the defining identity has been re-verified exactly."""

    l: int
    D: int
    P: tuple[int, ...]
    Q: tuple[int, ...]

    def evaluate(self, x: int) -> tuple[int, int]:
        return _poly_eval(self.P, x), _poly_eval(self.Q, x)

    def psi_pairs(self) -> list[tuple[int, int]]:
        """(P_i, Q_i) per degree; the psi+ coefficient is (P_i + Q_i sqrt D)/2."""
        q = list(self.Q) + [0] * (len(self.P) - len(self.Q))
        return list(zip(self.P, q))


@lru_cache(maxsize=None)
def half_factorization(l: int) -> HalfFactorization:
    if l < 3 or not is_prime(l):
        raise DomainError(f"need an odd prime l >= 3, got {l}")
    D = field_discriminant(l)
    residues = quadratic_residues(l)
    nonresidue = next(k for k in range(2, l) if k not in residues)

    # expand psi+ = prod over residues of (x - zeta^i), coefficients in Z[zeta]
    poly: list[CyclotomicInt] = [CyclotomicInt.one(l)]
    for i in residues:
        nxt = [CyclotomicInt.zero(l) for _ in range(len(poly) + 1)]
        for j, c in enumerate(poly):
            nxt[j + 1] = nxt[j + 1] + c
            nxt[j] = nxt[j] - c.rot(i)
        poly = nxt

    tau = gauss_sum(l)
    P: list[int] = []
    Q: list[int] = []
    for c in poly:
        sigma_c = c.galois(nonresidue)
        P.append((c + sigma_c).rational_value())
        # c - sigma(c) = Q_j sqrt(D); multiplying by tau lands in Q_j * (+-D)
        delta_tau = (c - sigma_c) * tau
        r = delta_tau.rational_value()
        if r % D:
            raise InconsistencyError(f"projection not divisible by D at l={l}")
        Q.append(r // D)

    if P[-1] != 2:
        raise InconsistencyError(f"leading P coefficient {P[-1]} != 2 at l={l}")
    if Q[-1] != 0:
        raise InconsistencyError(f"Q degree too large at l={l}")
    Q = Q[:-1]
    if abs(Q[-1]) != 1:
        raise InconsistencyError(f"leading Q coefficient {Q[-1]} not a unit at l={l}")
    if Q[-1] == -1:
        Q = [-q for q in Q]
    if any((p - q) % 2 for p, q in zip(P, Q + [0])):
        raise InconsistencyError(f"parity mismatch between P and Q at l={l}")

    # re-verify P^2 - D Q^2 = 4 Phi_l before handing the object out
    lhs = _poly_mul(P, P)
    for i, v in enumerate(_poly_mul(Q, Q)):
        lhs[i] -= D * v
    if lhs != [4] * l:
        raise InconsistencyError(f"identity P^2 - D Q^2 = 4 Phi_l fails at l={l}")

    return HalfFactorization(l=l, D=D, P=tuple(P), Q=tuple(Q))


def phi_eval(n: int, x: int) -> int:
    """Exact value of the n-th cyclotomic polynomial at integer x."""
    return cyclotomic_value(n, x)


def half_values(l: int, x: int) -> tuple[int, int]:
    """(X, Y) = (P(x), Q(x)), so that X^2 - D Y^2 = 4 Phi_l(x)."""
    return half_factorization(l).evaluate(x)


def small_range(l: int) -> tuple[int, int]:
    """Open interval (3^f, l^2) of x the series bounds do not cover, as the
    inclusive integer range [3^f + 1, l^2 - 1]; empty when 3^f >= l^2 - 1."""
    f = (l + 1) // 6
    return 3**f + 1, l * l - 1

# window constants, exact
RATIO_LOWER = Fraction(3791, 10000)
RATIO_UPPER = Fraction(6296, 10000)


def _lt_int_times_sqrt(A: int, C: int, D: int) -> bool:
    """Exact truth of A < C * sqrt(D) for integers with D > 0."""
    if C >= 0 and A < 0:
        return True
    if C <= 0 and A >= 0:
        return False
    if C > 0:  # both sides positive
        return A * A < C * C * D
    return A * A > C * C * D  # both negative


@dataclass(frozen=True)
class RatioCheck:
    l: int
    x: int
    X: int
    Y: int
    lower: Fraction
    upper: Fraction
    lower_ok: bool
    upper_ok: bool

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok


def _ratio_side(c: Fraction, x: int, X: int, Y: int, D: int, want_ratio_above: bool) -> bool:
    # decide  c/x < |Y| / |X - Y sqrt(D)|  (or the reverse) exactly.
    # Squaring: c^2 (X - Y sqrt D)^2  vs  x^2 Y^2, where for D < 0 the
    # modulus squared is X^2 + |D| Y^2 and everything is rational.
    n, d = c.numerator, c.denominator
    if D < 0:
        lhs = n * n * (X * X - D * Y * Y)
        rhs = d * d * x * x * Y * Y
        return lhs < rhs if want_ratio_above else lhs > rhs
    # D > 0: c^2 (X^2 + D Y^2) - x^2 d^2 Y^2  vs  c^2 * 2 X Y * sqrt(D)
    A = n * n * (X * X + D * Y * Y) - d * d * x * x * Y * Y
    C = 2 * n * n * X * Y
    return _lt_int_times_sqrt(A, C, D) if want_ratio_above else _lt_int_times_sqrt(-A, -C, D)


def lemma3_ratio_check(l: int, x: int) -> RatioCheck:
    """Certify 0.3791/x < |Y/(X - Y sqrt D)| < 0.6296/x by exact arithmetic.

    Admissible only for prime l >= 19 and x > 3^((l+1)//6), the regime where
    the window is claimed.
    """
    if l < 19 or not is_prime(l):
        raise DomainError(f"ratio window needs a prime l >= 19, got {l}")
    f = (l + 1) // 6
    if x <= 3**f:
        raise DomainError(f"x must exceed 3^{f} = {3**f}, got {x}")
    D = field_discriminant(l)
    X, Y = half_values(l, x)
    if X <= 0:
        raise InconsistencyError(f"X = {X} <= 0 at l={l}, x={x}")
    if Y == 0:
        raise InconsistencyError(f"Y = 0 at l={l}, x={x}")
    lower_ok = _ratio_side(RATIO_LOWER, x, X, Y, D, want_ratio_above=True)
    upper_ok = _ratio_side(RATIO_UPPER, x, X, Y, D, want_ratio_above=False)
    return RatioCheck(
        l=l, x=x, X=X, Y=Y,
        lower=RATIO_LOWER, upper=RATIO_UPPER,
        lower_ok=lower_ok, upper_ok=upper_ok,
    )


@dataclass(frozen=True)
class SmallRangeReport:
    l: int
    lo: int
    hi: int
    checked: int
    failures: tuple[int, ...]
    note: str

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def passed(self) -> bool:
        return not self.failures


def lemma3_smallrange_verify(l: int) -> SmallRangeReport:
    """Run the ratio window over every integer in (3^f, l^2).

    The range is nonempty only for l <= 37; for larger l the report is
    vacuously true and says so.
    """
    if l < 19 or not is_prime(l):
        raise DomainError(f"need a prime l >= 19, got {l}")
    lo, hi = small_range(l)
    if lo > hi:
        return SmallRangeReport(
            l=l, lo=lo, hi=hi, checked=0, failures=(),
            note=f"empty range: 3^{(l + 1) // 6} + 1 = {lo} > {hi} = l^2 - 1",
        )
    failures = tuple(
        x for x in range(lo, hi + 1) if not lemma3_ratio_check(l, x).passed
    )
    return SmallRangeReport(
        l=l, lo=lo, hi=hi, checked=hi - lo + 1, failures=failures,
        note=f"checked all {hi - lo + 1} integers in [{lo}, {hi}]",
    )


@dataclass(frozen=True)
class LargeXReport:
    l: int
    x: int
    X: int
    Y: int
    p_bound_ok: bool
    q_bound_ok: bool

    @property
    def passed(self) -> bool:
        return self.p_bound_ok and self.q_bound_ok


def lemma3_largex_bounds(l: int, x: int) -> LargeXReport:
    """For x >= l^2 certify the series truncation bounds

        |P(x) - 2 x^((l-1)/2) - x^((l-3)/2)| <  x^((l-3)/2) / 2
        | |Q(x)| - x^((l-3)/2) |             <  x^((l-3)/2) / (2 sqrt l)

    by exact integer comparison (squaring removes the sqrt l)."""
    if l < 19 or not is_prime(l):
        raise DomainError(f"need a prime l >= 19, got {l}")
    if x < l * l:
        raise DomainError(f"large-x bounds need x >= l^2 = {l * l}, got {x}")
    X, Y = half_values(l, x)
    half = (l - 1) // 2
    lead = x ** (half - 1)
    A = X - 2 * x**half - lead
    p_ok = 2 * abs(A) < lead
    B = abs(Y) - lead
    q_ok = 4 * l * B * B < lead * lead
    return LargeXReport(l=l, x=x, X=X, Y=Y, p_bound_ok=p_ok, q_bound_ok=q_ok)


def coprime_values(l: int, x: int) -> bool:
    """gcd(P(x), Q(x)) = 1 in the plain integer sense."""
    X, Y = half_values(l, x)
    return gcd(X, Y) == 1
