"""Shared exception types.

DomainError marks arguments outside an operation's contract (wrong parity,
non-prime modulus, x below the admissible range).  PremiseError marks a
verification request whose hypotheses fail on the supplied data; it carries
the list of failed premises so callers can report them.  Both are usage
errors, distinct from a verified-false conclusion, which verifiers report
through their result objects.
"""

from __future__ import annotations


class DomainError(ValueError):
    pass


class PremiseError(DomainError):
    def __init__(self, failures: list[str]):
        super().__init__("; ".join(failures))
        self.failures = list(failures)


class FactorizationBudgetExceeded(RuntimeError):
    """Factoring ran out of its iteration budget; carries partial progress."""

    def __init__(self, n: int, partial: dict[int, int], cofactor: int):
        super().__init__(
            f"budget exhausted factoring {n}; unfactored cofactor {cofactor}"
        )
        self.n = n
        self.partial = dict(partial)
        self.cofactor = cofactor


class InconsistencyError(RuntimeError):
    """An internal certified check failed where theory says it cannot."""
