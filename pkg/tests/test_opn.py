"""Tests for Euler-form analysis: partition, f-counts and the r bounds.

The order-criterion valuation inside sigma(q**(2 beta)) is cross-checked
against direct division of the materialized sigma wherever that is cheap,
which is the one genuinely error-prone computation in this module.  The
partition itself is validated for completeness and disjointness over a
thousand seeded random Euler-shaped inputs.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opngap.arith import is_prime, sigma_pp
from opngap.errors import DomainError
from opngap.opn import (
    EulerFormNumber,
    PartitionResult,
    TBoundReport,
    abundancy_is_two,
    choose_l,
    classical_r_bound,
    lemma2_primitive_predictions,
    n_bound_exponents,
    partition_STU,
    r_bound,
    sigma_valuation,
    t_bound_check,
)

ODD_PRIMES = [p for p in range(3, 120) if is_prime(p)]


class TestEulerFormNumber:
    def test_valid_construction(self):
        form = EulerFormNumber(5, 1, (3, 11), 1)
        assert form.r == 2
        assert form.omega() == 3
        assert form.pairs == ((3, 2), (11, 2))
        assert form.value() == 5 * 9 * 121
        assert form.sigma() == 6 * 13 * 133
        assert not form.is_perfect()
        assert not form.beta_gate_ok
        assert EulerFormNumber(13, 1, (3,), 9).beta_gate_ok

    def test_from_pairs(self):
        form = EulerFormNumber.from_pairs(5, 1, [(3, 4), (11, 4)])
        assert form.beta == 2
        with pytest.raises(DomainError):
            EulerFormNumber.from_pairs(5, 1, [(3, 4), (11, 6)])
        with pytest.raises(DomainError):
            EulerFormNumber.from_pairs(5, 1, [(3, 3)])
        with pytest.raises(DomainError):
            EulerFormNumber.from_pairs(5, 1, [])

    def test_invariants_enforced(self):
        with pytest.raises(DomainError):
            EulerFormNumber(7, 1, (3,), 1)  # p = 3 (mod 4)
        with pytest.raises(DomainError):
            EulerFormNumber(5, 2, (3,), 1)  # alpha even
        with pytest.raises(DomainError):
            EulerFormNumber(5, 3, (3,), 1)  # alpha = 3 (mod 4)
        with pytest.raises(DomainError):
            EulerFormNumber(5, 1, (3, 3), 1)  # duplicate
        with pytest.raises(DomainError):
            EulerFormNumber(5, 1, (2, 3), 1)  # even q
        with pytest.raises(DomainError):
            EulerFormNumber(5, 1, (5, 3), 1)  # special prime repeated
        with pytest.raises(DomainError):
            EulerFormNumber(5, 1, (9, 3), 1)  # composite q
        with pytest.raises(DomainError):
            EulerFormNumber(5, 1, (3,), 0)  # beta

    def test_perfect_detection_on_even_shape(self):
        # the type is odd-only by construction; abundancy is tested on its
        # own function below, here just sanity of sigma on a known value
        assert EulerFormNumber(5, 1, (3,), 1).sigma() == 6 * 13


class TestSigmaValuation:
    def test_pinned(self):
        # sigma(3**14) = 7174453 = 11**2 * 13 * 4561
        assert sigma_valuation(11, 3, 14) == 2
        assert sigma_valuation(13, 3, 14) == 1
        assert sigma_valuation(4561, 3, 14) == 1
        assert sigma_valuation(7, 3, 14) == 0

    def test_congruent_base_counts_exponent(self):
        # qi = 1 (mod qj): every term of the sum is 1, so the valuation
        # is v_qj(c + 1)
        assert sigma_valuation(3, 7, 8) == 2  # c+1 = 9
        assert sigma_valuation(3, 7, 2) == 1
        assert sigma_valuation(3, 7, 1) == 0

    @given(
        st.sampled_from(ODD_PRIMES),
        st.sampled_from(ODD_PRIMES),
        st.integers(1, 40),
    )
    @settings(max_examples=300, deadline=None)
    def test_matches_direct_division(self, qj, qi, c):
        if qj == qi:
            return
        sigma = sigma_pp(qi, c)
        direct = 0
        while sigma % qj == 0:
            sigma //= qj
            direct += 1
        assert sigma_valuation(qj, qi, c) == direct

    def test_domain(self):
        with pytest.raises(DomainError):
            sigma_valuation(3, 3, 4)
        with pytest.raises(DomainError):
            sigma_valuation(2, 7, 4)
        with pytest.raises(DomainError):
            sigma_valuation(9, 7, 4)


class TestChooseL:
    def test_beta_one(self):
        assert choose_l(EulerFormNumber(5, 1, (3, 11), 1)) == (3, 0)

    def test_beta_nine(self):
        form = EulerFormNumber(13, 1, (7, 19, 3), 9)
        assert choose_l(form) == (19, 1)

    def test_composite_picks_largest_present(self):
        # 2 beta + 1 = 15 = 3 * 5 with only 5 in the list
        form = EulerFormNumber(13, 1, (7, 5), 7)
        assert choose_l(form) == (5, 1)
        # both present: the larger wins
        both = EulerFormNumber(13, 1, (3, 5), 7)
        assert choose_l(both) == (5, 1)

    def test_no_factor_present(self):
        assert choose_l(EulerFormNumber(5, 1, (7, 11), 1)) is None


class TestPartition:
    def test_synthetic_all_u(self):
        # sigma(11**2) = 133 = 7 * 19 meets no q_j
        form = EulerFormNumber(5, 1, (3, 11), 1)
        res = partition_STU(form, 3, 0)
        assert res.S == frozenset() and res.T == frozenset()
        assert res.U == frozenset({1})
        assert res.index_sets_partition(form.r)
        assert res.gamma == 1 and res.s == 1
        assert res.classical_r_bound is None

    def test_composite_beta_case_empties_u(self):
        # 2 beta + 1 = 15, l = 5: sigma(3**14) = 11**2 * 13 * 4561 meets 11
        form = EulerFormNumber(13, 1, (5, 3, 11), 7)
        res = partition_STU(form, 5, 0)
        assert res.U == frozenset()
        assert res.S == frozenset({2})  # 11 = 1 (mod 5)
        assert res.T == frozenset({1})
        assert res.f == {1: 2} and res.delta == 0
        assert res.all_t_supported
        assert res.gamma is None and res.s == 2
        assert res.classical_r_bound == Fraction(2 * 7 * 1, 1)

    def test_t_membership_with_zero_f(self):
        # l = 5 with qs (5, 3, 13): sigma(3**2) = 13 and sigma(13**2) =
        # 3 * 61 cross-link the two non-pivot primes, but neither is
        # 1 (mod 5), so S is empty and both T members have f = 0; the
        # flag reports the unsupported membership
        form = EulerFormNumber(17, 1, (5, 3, 13), 1)
        res = partition_STU(form, 5, 0)
        assert res.S == frozenset()
        assert res.T == frozenset({1, 2})
        assert res.f == {1: 0, 2: 0}
        assert not res.all_t_supported

    def test_pivot_validation(self):
        form = EulerFormNumber(5, 1, (3, 11), 1)
        with pytest.raises(DomainError):
            partition_STU(form, 11, 0)
        with pytest.raises(DomainError):
            partition_STU(form, 3, 1)

    def test_thousand_random_partitions(self):
        rng = random.Random(0xC0FFEE)
        pool = [q for q in ODD_PRIMES if q < 60]
        for _ in range(1000):
            beta = rng.randint(1, 5)
            r = rng.randint(1, 4)
            qs = tuple(rng.sample(pool, r))
            p = rng.choice([5, 13, 17, 29, 37])
            while p in qs:
                p = rng.choice([5, 13, 17, 29, 37])
            form = EulerFormNumber(p, rng.choice([1, 5, 9]), qs, beta)
            i0 = rng.randrange(r)
            res = partition_STU(form, qs[i0], i0)
            assert res.index_sets_partition(r)
            assert res.S.isdisjoint(res.T) and res.S.isdisjoint(res.U)
            assert res.T.isdisjoint(res.U)
            assert set(res.f) == set(res.T)
            assert res.delta == sum(1 for v in res.f.values() if v == 1)
            assert res.delta <= len(res.T)

    def test_lemma2_predictions_witnessed(self):
        # each divisor d of (2 beta + 1)/l yields a primitive prime of
        # Phi_{l d}(q_i) that is 1 (mod l)
        preds = lemma2_primitive_predictions(3, 15, 5)
        assert preds == [(5, 11), (15, 4561)]
        for qi in (3, 7, 11, 13):
            for n, prime in lemma2_primitive_predictions(qi, 45, 5):
                assert prime % 5 == 1
                assert sigma_valuation(prime, qi, 44) >= 1
        with pytest.raises(DomainError):
            lemma2_primitive_predictions(3, 14, 5)


class TestTBound:
    def test_trivial_instance(self):
        form = EulerFormNumber(5, 1, (3, 11), 1)
        res = partition_STU(form, 3, 0)
        rep = t_bound_check(res, 1)
        assert bool(rep) and rep.headline

    def test_composite_instance(self):
        form = EulerFormNumber(13, 1, (5, 3, 11), 7)
        rep = t_bound_check(partition_STU(form, 5, 0), 7)
        assert rep.ok
        assert rep.delta <= 2 * rep.s_count

    def test_violations_reported_not_raised(self):
        # hand-built result violating the upper chain: f too heavy for #S
        res = PartitionResult(
            l=3, beta=1, i0=0,
            S=frozenset(), T=frozenset({1}), U=frozenset(),
            f={1: 5}, delta=0, gamma=1, s=1, classical_r_bound=None,
        )
        rep = t_bound_check(res, 1)
        assert not rep.upper_chain and not rep.ok
        assert rep.f_sum == 5 and rep.s_count == 0

    def test_headline_uses_exact_rational_half(self):
        # #T = 3, delta = 1, beta = 1: 3 <= 2 + 1/2 is false; a floored
        # delta//2 = 0 and a rounded-up 1 would both misjudge neighbors
        res = PartitionResult(
            l=3, beta=1, i0=0,
            S=frozenset({2, 3}), T=frozenset({1, 4, 5}), U=frozenset(),
            f={1: 1, 4: 2, 5: 2}, delta=1, gamma=1, s=1,
            classical_r_bound=None,
        )
        rep = t_bound_check(res, 1)
        assert not rep.headline
        res2 = PartitionResult(
            l=3, beta=1, i0=0,
            S=frozenset({2, 3}), T=frozenset({1, 4}), U=frozenset(),
            f={1: 1, 4: 2}, delta=1, gamma=1, s=1, classical_r_bound=None,
        )
        assert t_bound_check(res2, 1).headline  # 2 <= 2 + 1/2


class TestRBounds:
    def test_pinned_values(self):
        assert r_bound(9) == 236
        assert r_bound(9, "standard") == 236
        assert classical_r_bound(9) == 344
        assert r_bound(29, "seven") == 1887

    def test_seven_variant_gate(self):
        assert r_bound(7, "seven") == 2 * 49 + 49 + 2  # 15 composite
        with pytest.raises(DomainError):
            r_bound(9, "seven")  # 19 prime, beta < 29
        assert r_bound(33, "seven") == 2 * 33**2 + 7 * 33 + 2

    def test_unknown_variant(self):
        with pytest.raises(DomainError):
            r_bound(9, "six")

    def test_exponents_pinned(self):
        assert n_bound_exponents(9) == (237, 345)
        assert n_bound_exponents(1) == (13, 9)

    def test_new_exponent_is_r_bound_plus_one(self):
        for beta in range(1, 1001):
            assert n_bound_exponents(beta)[0] == r_bound(beta) + 1

    def test_crossover_where_new_wins(self):
        # the refined exponent loses at tiny beta and wins from beta = 4 on
        new, old = zip(*(n_bound_exponents(b) for b in range(1, 12)))
        assert new[0] > old[0]
        assert all(n < o for n, o in zip(new[3:], old[3:]))

    def test_domain(self):
        for fn in (r_bound, classical_r_bound, n_bound_exponents):
            with pytest.raises(DomainError):
                fn(0)


def brute_sigma(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


class TestAbundancy:
    def test_known_perfect(self):
        for n in (6, 28, 496, 8128, 33550336):
            assert abundancy_is_two(n)

    def test_known_not_perfect(self):
        for n in (1, 2, 12, 100, 8129):
            assert not abundancy_is_two(n)

    def test_supplied_factorization(self):
        assert abundancy_is_two(28, {2: 2, 7: 1})
        with pytest.raises(DomainError):
            abundancy_is_two(28, {2: 2, 7: 2})
        with pytest.raises(DomainError):
            abundancy_is_two(28, {4: 1, 7: 1})

    @given(st.integers(2, 20000))
    @settings(max_examples=200, deadline=None)
    def test_matches_brute_sigma(self, n):
        assert abundancy_is_two(n) == (brute_sigma(n) == 2 * n)

    def test_domain(self):
        with pytest.raises(DomainError):
            abundancy_is_two(0)
