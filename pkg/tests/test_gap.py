"""Tests for the gap engines and the scale-tagged bound chains.

Chain endpoints are pinned against an independent mpmath recomputation of
R' * base * log(p)/(l-1).  The root-count formula is checked against
exhaustive counting, including a composite modulus where the naive
gcd(l, lambda(M)) answer differs from the correct product over prime
powers.  Genuine three-solution witnesses are believed not to exist at
accessible scale, so the unit engine's analysis is exercised on synthetic
witnesses with the product identities switched off, plus one genuine pair
(x = 2 and 4 at l = 19) that fails exactly on multiplicative dependence.
"""

from fractions import Fraction
from math import gcd

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opngap.arith import SMALL_PRIMES, is_prime
from opngap.errors import (
    DomainError,
    FactorizationBudgetExceeded,
    InconsistencyError,
    PremiseError,
)
from opngap.gap import (
    BoundReport,
    GapWitness,
    Scale,
    Scaled,
    bound_chain,
    lemma0_verdict,
    lemma4_power_count,
    lemma4_residue_census,
    lemma4_verify,
    lemma5_branch_constants,
    lemma5_verify,
    root_count_formula,
    root_count_mod,
)
from opngap.intervals import RationalInterval

@pytest.fixture(scope="module", autouse=True)
def _oracle_precision():
    with mpmath.workdps(60):
        yield


def mpf_of(fr: Fraction) -> mpmath.mpf:
    return mpmath.mpf(fr.numerator) / fr.denominator


def contains(iv: RationalInterval, x) -> bool:
    return mpf_of(iv.lo) <= x <= mpf_of(iv.hi)


class TestRootCount:
    def test_pinned(self):
        assert root_count_mod(19, 191) == 19
        assert root_count_mod(19, 7) == 1
        assert root_count_mod(5, 11) == 5

    def test_formula_matches_brute_on_primes(self):
        for l in (5, 7, 19, 23):
            for q in SMALL_PRIMES:
                if q >= 500:
                    break
                if q == 2:
                    continue
                assert root_count_formula(l, q) == root_count_mod(l, q), (l, q)
                assert root_count_formula(l, q) == gcd(l, q - 1)

    def test_composite_needs_product_not_lcm(self):
        # M = 191 * 229: both factors are 1 mod 19, so there are 19 * 19
        # solutions by the Chinese remainder theorem, while
        # gcd(19, lambda(M)) = gcd(19, lcm(190, 228)) is only 19
        M = 191 * 229
        lam = 190 * 228 // gcd(190, 228)
        assert gcd(19, lam) == 19
        assert root_count_formula(19, M) == 361
        assert root_count_mod(19, M) == 361

    def test_prime_power_and_two_power_moduli(self):
        assert root_count_mod(5, 11**3) == root_count_formula(5, 11**3) == 5
        for k in (1, 2, 3, 7):
            assert root_count_mod(7, 2**k) == 1

    @given(st.integers(2, 30000), st.sampled_from((3, 5, 7, 19)))
    @settings(max_examples=60, deadline=None)
    def test_formula_matches_brute_random(self, M, l):
        assert root_count_formula(l, M) == root_count_mod(l, M)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            root_count_mod(2, 15)
        with pytest.raises(DomainError):
            root_count_mod(4, 15)
        with pytest.raises(DomainError):
            root_count_mod(5, 1)

    def test_budget_surfaces_as_resource_error(self):
        M = 1000003 * 1000033  # above the brute cutoff, no small factors
        with pytest.raises(FactorizationBudgetExceeded):
            root_count_mod(19, M, rho_budget=1)


class TestLemma4Counting:
    def test_power_count_dominates_root_count(self):
        # the grid always offers at least l+1 products, one more than the
        # largest possible root count modulo a prime
        for l in [p for p in SMALL_PRIMES if 19 <= p <= 997]:
            assert lemma4_power_count(l) >= l + 1

    def test_power_count_pinned(self):
        assert lemma4_power_count(19) == 21

    def test_census_on_lth_roots(self):
        roots = [x for x in range(2, 191) if pow(x, 19, 191) == 1]
        assert len(roots) == 18
        x1, x2 = roots[0], roots[1]
        pairs, distinct, all_roots = lemma4_residue_census(19, x1, x2, 191)
        assert pairs == 21
        assert all_roots
        # only 19 roots exist, so the 21 products must collide mod q:
        # with x2 <= x1**3 they could not all be distinct integers
        assert distinct <= 19

    def test_census_pair_count_matches_formula(self):
        for l in (19, 23, 31):
            pairs, _, _ = lemma4_residue_census(l, 2, 3, 101)
            assert pairs == lemma4_power_count(l)


def _synthetic_independent_pair(l: int, q: int) -> tuple[int, int]:
    """Two l-th roots of unity mod q, lifted so the gap and independence
    premises hold."""
    from opngap.arith import multiplicative_dependence

    roots = [x for x in range(2, q) if pow(x, l, q) == 1]
    x1 = roots[0]
    f = (l + 1) // 6
    x2 = roots[1]
    while x2 <= x1**f or multiplicative_dependence(x1, x2) is not None:
        x2 += q
    return x1, x2


class TestLemma4Verify:
    def test_synthetic_pass(self):
        x1, x2 = _synthetic_independent_pair(19, 191)
        rep = lemma4_verify(19, x1, x2, None, 0, 0, 191, recheck=False)
        assert rep.passed and rep.gap_holds
        assert rep.engine_fires  # 21 products vs at most 19 roots
        assert rep.root_count == 19
        assert rep.residues_are_lth_roots
        assert rep.distinct_residues <= rep.root_count

    def test_genuine_dependent_pair_rejected(self):
        # Phi_19(2) = 524287 and Phi_19(4) = 174763 * 524287 share q with
        # genuine products, but 4 = 2**2 voids the independence premise,
        # and indeed the gap conclusion fails here: 4 < 2**3
        with pytest.raises(PremiseError) as exc:
            lemma4_verify(19, 2, 4, 174763, 0, 1, 524287)
        assert any("dependent" in f for f in exc.value.failures)

    def test_product_identity_rechecked(self):
        with pytest.raises(PremiseError) as exc:
            lemma4_verify(19, 3, 100, 571, 1, 1, 191)
        assert any("multiplies to" in f for f in exc.value.failures)

    def test_gap_failure_reported_not_raised(self):
        # structure fine, gap false: verdict false, no exception raised
        rep = lemma4_verify(19, 6, 50, None, 0, 0, 191, recheck=False)
        assert not rep.passed and not rep.gap_holds

    def test_structure_failures_collected(self):
        with pytest.raises(PremiseError) as exc:
            lemma4_verify(17, 5, 3, None, 0, 0, 191, recheck=False)
        msgs = "\n".join(exc.value.failures)
        assert "prime >= 19" in msgs and "x2 > x1" in msgs


class TestGapWitness:
    def test_checked_rejects_bad_structure(self):
        with pytest.raises(PremiseError):
            GapWitness.checked(17, None, 191, [(2, 0), (9, 0), (730, 0)])
        with pytest.raises(PremiseError):
            GapWitness.checked(19, None, 191, [(2, 0), (9, 0)])
        with pytest.raises(PremiseError) as exc:
            GapWitness.checked(19, None, 191, [(9, 0), (2, 0), (730, 0)])
        assert any("increasing" in f for f in exc.value.failures)

    def test_checked_verifies_products(self):
        with pytest.raises(PremiseError) as exc:
            GapWitness.checked(19, None, 524287, [(2, 0), (9, 0), (730, 0)])
        assert any("at x2" in f for f in exc.value.failures)

    def test_genuine_single_product_accepted_in_position(self):
        # only x1's identity is genuine; the failure list localizes x2, x3
        with pytest.raises(PremiseError) as exc:
            GapWitness.checked(
                19, None, 524287, [(2, 0), (9, 0), (730, 0)]
            )
        assert not any("at x1" in f for f in exc.value.failures)


SYNTH = GapWitness(19, None, 191, ((10, 0), (1001, 0), (10**10 + 1, 13)))


class TestLemma5Verify:
    def test_synthetic_threshold_pass(self):
        rep = lemma5_verify(SYNTH, recheck=False)
        assert rep.passed and rep.threshold_holds
        assert rep.gaps_hold == (True, True)
        # 0.397 * pi * 10 = 12.47..., and m3 = 13 clears it
        assert contains(rep.m3_threshold, mpmath.mpf("0.397") * mpmath.pi * 10)

    def test_synthetic_threshold_counterexample(self):
        w = GapWitness(19, None, 191, ((10, 0), (1001, 0), (10**10 + 1, 12)))
        rep = lemma5_verify(w, recheck=False)
        assert not rep.passed and not rep.threshold_holds

    def test_branch_inequalities_evaluated(self):
        rep = lemma5_verify(SYNTH, recheck=False)
        # 2.5184 * 13 * (1/10 + 1/1001 + ...) = 3.306... > pi, barely
        assert rep.branch_b_nonzero_holds
        # 0.15/10 = 0.015 but m3 (1/x2 + 1/x3) is only about 0.013
        assert not rep.branch_b_zero_holds

    def test_gap_premise_enforced(self):
        w = GapWitness(19, None, 191, ((10, 0), (999, 0), (10**10 + 1, 13)))
        with pytest.raises(PremiseError) as exc:
            lemma5_verify(w, recheck=False)
        assert any("gap" in f for f in exc.value.failures)

    def test_products_rechecked_by_default(self):
        with pytest.raises(PremiseError) as exc:
            lemma5_verify(SYNTH)
        assert any("at x1" in f for f in exc.value.failures)

    def test_malformed_witness_never_reaches_analysis(self):
        w = GapWitness(19, None, 191, ((10, 0), (1001, 0)))
        with pytest.raises(PremiseError):
            lemma5_verify(w, recheck=False)


class TestBranchConstants:
    def test_pinned_l19(self):
        bc = lemma5_branch_constants(19)
        assert bc.coefficient == Fraction(81, 20)  # 0.15 * 27 = 4.05
        assert bc.exceeds_linear_term        # 4.05 > 3.8
        assert bc.linear_term_bounds_regulator  # 3.8 > pi
        assert bc.exceeds_regulator and bc.all_ok

    def test_pinned_l29(self):
        bc = lemma5_branch_constants(29)
        assert bc.coefficient == Fraction(729, 20)  # 0.15 * 243 = 36.45
        assert bc.all_ok  # 36.45 > 29 > R = 1.647...

    def test_all_small_primes_close(self):
        for l in [p for p in SMALL_PRIMES if 19 <= p <= 199]:
            assert lemma5_branch_constants(l).all_ok, l

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma5_branch_constants(17)


class TestScaled:
    def test_upward_conversion(self):
        s = Scaled.linear(8)
        assert s.scale is Scale.LINEAR
        slog = s.log()
        assert slog.scale is Scale.LOG
        assert contains(slog.value, mpmath.log(8))
        sll = slog.log()
        assert sll.scale is Scale.LOGLOG
        assert contains(sll.value, mpmath.log(mpmath.log(8)))

    def test_no_scale_above_loglog(self):
        with pytest.raises(DomainError):
            Scaled.linear(8).log().log().log()

    def test_log_needs_positive(self):
        with pytest.raises(DomainError):
            Scaled(Scale.LOG, RationalInterval(-1, 1)).log()

    def test_mixed_scale_comparison_refused(self):
        with pytest.raises(DomainError):
            Scaled.linear(8).gt(Scaled.linear(4).log())
        with pytest.raises(DomainError):
            Scaled.linear(8).lt(Scaled.linear(4).log())

    def test_same_scale_comparison(self):
        assert Scaled.linear(8).log().gt(Scaled.linear(4).log()) is True


class TestBoundChain:
    def test_l19_pinned(self):
        rep = bound_chain(19)
        assert [s.name for s in rep.steps] == [
            "q1", "q2", "q3", "log_q5", "loglog_q7",
        ]
        assert rep.step("q1").bound.value.lo == 3
        assert rep.step("q2").bound.value.lo == 29
        assert rep.step("q3").bound.value.lo == 24391
        assert rep.p_floor == 41
        truth = mpmath.mpf("0.397") * mpmath.pi * 24391 * mpmath.log(41) / 18
        log_q5 = rep.step("log_q5").bound.value
        assert contains(log_q5, truth)
        assert log_q5.lo > 6238
        loglog_q7 = rep.step("loglog_q7").bound.value
        assert contains(
            loglog_q7,
            truth + mpmath.log(mpmath.mpf("0.397") * mpmath.pi
                               * mpmath.log(41) / 18),
        )
        assert loglog_q7.lo > 6000
        assert rep.verdict
        assert dict(rep.milestones) == {
            "log_q5 > 6238": True, "loglog_q7 > 6000": True,
        }

    def test_l19_threshold_value(self):
        rep = bound_chain(19)
        assert rep.threshold.scale is Scale.LOGLOG
        truth = 361 * mpmath.log(4) + mpmath.log(mpmath.log(2))
        assert contains(rep.threshold.value, truth)

    def test_l23_pinned(self):
        rep = bound_chain(23)
        assert rep.step("q2").bound.value.lo == 83
        assert rep.step("q3").bound.value.lo == 47458351
        assert rep.p_floor == 47
        assert dict(rep.milestones) == {"log_q5 > 3040000": True}

    def test_deep_band_clears_milestone(self):
        for l in (23, 29, 31, 37, 41, 43, 47, 53):
            rep = bound_chain(l)
            assert rep.verdict, l
            assert all(ok for _, ok in rep.milestones), l

    def test_l59_pinned(self):
        rep = bound_chain(59)
        assert [s.name for s in rep.steps] == ["q1", "q2", "log_q4", "loglog_q6"]
        assert rep.step("q2").bound.value.lo == 59051
        assert rep.p_floor == 127
        truth = mpmath.mpf("0.397") * mpmath.pi * 59051 * mpmath.log(127) / 58
        assert contains(rep.step("log_q4").bound.value, truth)
        assert rep.verdict
        assert dict(rep.milestones) == {"loglog_q6 > l^2 log 4": True}

    def test_scales_in_report(self):
        rep = bound_chain(61)
        assert rep.step("q2").bound.scale is Scale.LINEAR
        assert rep.step("log_q4").bound.scale is Scale.LOG
        assert rep.step("loglog_q6").bound.scale is Scale.LOGLOG
        with pytest.raises(DomainError):
            rep.final.bound.gt(rep.step("q2").bound)

    def test_q2_nondecreasing_but_log_bound_dips(self):
        # q2 = next prime above 3**floor((l+1)/6) never decreases in l, yet
        # the log bound can dip where f stalls while l-1 grows: 137 -> 139
        # keeps f = 23 and q2, p barely move, so dividing by l-1 wins
        prev = 0
        for l in [p for p in SMALL_PRIMES if 59 <= p <= 151]:
            q2 = int(bound_chain(l).step("q2").bound.value.lo)
            assert q2 >= prev
            prev = q2
        a137 = bound_chain(137).step("log_q4").bound.value
        a139 = bound_chain(139).step("log_q4").bound.value
        assert a139.hi < a137.lo

    def test_rows_render(self):
        rows = bound_chain(19).rows()
        assert rows[0] == ("q1", "linear", "3")
        assert rows[3][1] == "log"
        assert rows[4][1] == "loglog"

    def test_domain(self):
        for bad in (17, 20, 1):
            with pytest.raises(DomainError):
                bound_chain(bad)


class TestLemma0Verdict:
    def test_band_boundaries(self):
        assert lemma0_verdict(19) == 6
        assert lemma0_verdict(53) == 6
        assert lemma0_verdict(59) == 5
        assert lemma0_verdict(61) == 5
        assert lemma0_verdict(499) == 5

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma0_verdict(17)
        with pytest.raises(DomainError):
            lemma0_verdict(20)
