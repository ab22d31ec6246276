import math

import numpy as np
import pytest
from hypothesis import given, settings

import branchtrees as bt
from branchtrees import BUILTIN_FAMILIES, BUILTIN_LAWS, TailFamily

from conftest import finite_laws, random_law_corpus

LAW_A = BUILTIN_LAWS["LAW-A"]
LAW_B = BUILTIN_LAWS["LAW-B"]

ZETA2 = BUILTIN_FAMILIES["zeta2"]

# closed forms for the s=2 delayed family: the damped mean is
# -c ln(1 - x) with c = 6/pi^2, so 1 - e^(-alpha) = exp(-pi^2/6)
ZETA2_X = 1.0 - math.exp(-math.pi**2 / 6.0)
ZETA2_ALPHA = -math.log(ZETA2_X)
ZETA2_BETA = (6.0 / math.pi**2) * ZETA2_X / (1.0 - ZETA2_X)


class TestFiniteLawMoments:
    def test_law_a_values(self):
        fam = TailFamily.finite(LAW_A)
        alpha = bt.family_alpha(fam).alpha
        assert abs(bt.xi_log_xi(fam, alpha).value - math.log(4.0 / 3.0)) <= 1e-10
        assert abs(bt.xi_log_nu(fam, alpha).value - math.log(2.0)) <= 1e-10
        assert abs(bt.nu_log_nu(fam).value - 1.5 * math.log(2.0)) <= 1e-10

    def test_law_b_unit_value_gives_zero(self):
        fam = TailFamily.finite(LAW_B)
        alpha = bt.family_alpha(fam).alpha
        assert abs(bt.xi_log_xi(fam, alpha).value) <= 1e-12
        assert abs(bt.xi_log_nu(fam, alpha).value - math.log(2.0)) <= 1e-10

    def test_single_child_law_all_zero(self):
        fam = TailFamily.finite(bt.validate_law(0.0, [(1.0, [1])]))
        assert bt.nu_log_nu(fam).value == 0.0

    def test_alpha_required(self):
        with pytest.raises(bt.AlphaMissingError):
            bt.xi_log_xi(TailFamily.finite(LAW_A), None)

    @given(finite_laws(min_mean=1.05))
    @settings(max_examples=40, deadline=None)
    def test_weak_moment_below_strong_moment(self, law):
        # xi <= nu pointwise, so E(xi log nu) <= E(nu log nu)
        fam = TailFamily.finite(law)
        alpha = bt.family_alpha(fam).alpha
        assert bt.xi_log_nu(fam, alpha).value <= bt.nu_log_nu(fam).value + 1e-12


class TestDelayedFamilies:
    def test_bad_parameters(self):
        with pytest.raises(bt.InputError):
            TailFamily.delayed_power(1.0)
        with pytest.raises(bt.InputError):
            TailFamily.delayed_power(2.0, k0=0)
        with pytest.raises(bt.InputError):
            TailFamily.delayed_zeta2_log(-0.5)

    def test_power_normalization(self):
        fam = TailFamily.delayed_power(2.5, k0=2)
        pk = bt.xlogx.tail_pmf(fam, 2_000_000)
        # remainder past the brute cutoff is below the integral bound
        assert pk.sum() <= 1.0 + 1e-12
        assert 1.0 - pk.sum() <= 2.5 * 2_000_000 ** -1.5

    def test_zeta2_log_normalization_certificate(self):
        fam = TailFamily.delayed_zeta2_log(1.0)
        assert fam.norm_err <= 1e-10
        pk = bt.xlogx.tail_pmf(fam, 1_000_000)
        assert abs(pk.sum() + fam.norm / 1_000_000 - 1.0) <= 1e-4

    def test_zeta2_alpha_and_beta_closed_forms(self):
        sol = bt.family_alpha(ZETA2)
        assert abs(sol.alpha - ZETA2_ALPHA) <= 1e-10
        assert abs(sol.beta - ZETA2_BETA) <= 1e-10
        assert sol.criticality == "supercritical"
        assert sol.exists

    def test_damped_moments_match_brute_force(self):
        # independent oracle: raw numpy sums over an unrolled pmf, long
        # past where the exponential damping has killed the terms
        for fam in (ZETA2, BUILTIN_FAMILIES["zeta2log-1"]):
            alpha = bt.family_alpha(fam).alpha
            x = math.exp(-alpha)
            pk = bt.xlogx.tail_pmf(fam, 20_000)
            ks = np.arange(0, 20_001, dtype=np.float64)
            with np.errstate(divide="ignore", invalid="ignore"):
                logk = np.where(ks >= 1, np.log(np.maximum(ks, 1.0)), 0.0)
            xi = ks * x**ks
            direct_15 = float(np.sum(pk * xi * logk))
            got_15 = bt.xi_log_nu(fam, alpha)
            assert abs(got_15.value - direct_15) <= 1e-10

            xilogxi = np.where(xi > 0.0, pk * xi * np.log(np.where(xi > 0, xi, 1.0)), 0.0)
            direct_12 = float(np.sum(xilogxi))
            got_12 = bt.xi_log_xi(fam, alpha)
            assert abs(got_12.value - direct_12) <= 1e-10

    def test_split_identity_for_delayed_laws(self):
        # E(xi log xi) must equal E(e^(-a nu) nu log nu) - a E(nu^2 e^(-a nu))
        fam = ZETA2
        alpha = bt.family_alpha(fam).alpha
        x = math.exp(-alpha)
        pk = bt.xlogx.tail_pmf(fam, 20_000)
        ks = np.arange(0, 20_001, dtype=np.float64)
        logk = np.where(ks >= 1, np.log(np.maximum(ks, 1.0)), 0.0)
        s1 = float(np.sum(pk * ks * logk * x**ks))
        s2 = float(np.sum(pk * ks**2 * x**ks))
        assert abs(bt.xi_log_xi(fam, alpha).value - (s1 - alpha * s2)) <= 1e-10


class TestDivergenceVerdicts:
    @pytest.mark.parametrize("s", [1.5, 2.0])
    def test_heavy_power_tails_diverge(self, s):
        verdict = bt.nu_log_nu(TailFamily.delayed_power(s))
        assert verdict.divergent
        assert verdict.value == math.inf
        assert "partial sums" in verdict.witness

    @pytest.mark.parametrize("q", [1.0, 2.0])
    def test_log_tails_diverge_up_to_q_two(self, q):
        assert bt.nu_log_nu(TailFamily.delayed_zeta2_log(q)).divergent

    @pytest.mark.parametrize("s", [2.5, 3.5])
    def test_lighter_power_tails_converge(self, s):
        verdict = bt.nu_log_nu(TailFamily.delayed_power(s))
        assert verdict.finite
        assert verdict.tail_bound <= 1e-8

    def test_log_tail_converges_past_q_two(self):
        verdict = bt.nu_log_nu(TailFamily.delayed_zeta2_log(3.0))
        assert verdict.finite and verdict.tail_bound <= 1e-8

    def test_power_log_sum_against_brute_force(self):
        # s = 3: c sum k^(-2) ln k = zeta'(2)-style series; brute force
        # plus integral remainder brackets the certified value
        fam = TailFamily.delayed_power(3.0)
        verdict = bt.nu_log_nu(fam)
        K = 2_000_000
        ks = np.arange(1, K + 1, dtype=np.float64)
        brute = fam.norm * float(np.sum(ks**-2.0 * np.log(ks)))
        lo = brute  # increasing partial sums
        hi = brute + fam.norm * K**-1.0 * (math.log(K) + 1.0)
        assert lo - 1e-12 <= verdict.value <= hi + 1e-12


class TestMomentClassification:
    def test_law_a_all_finite_consistent(self):
        report = bt.classify_moment_conditions(TailFamily.finite(LAW_A))
        assert report.beta_finite
        assert report.xi_log_xi.finite
        assert report.xi_log_nu.finite
        assert report.nu_log_nu.finite
        assert report.consistent

    def test_zeta2_separation_witness(self):
        report = bt.classify_moment_conditions(ZETA2)
        assert report.nu_log_nu.divergent
        assert report.xi_log_nu.finite
        assert report.xi_log_xi.finite
        assert report.beta_finite
        assert abs(report.beta - ZETA2_BETA) <= 1e-3
        assert report.consistent

    def test_builtin_families_consistent(self):
        for name, fam in BUILTIN_FAMILIES.items():
            report = bt.classify_moment_conditions(fam)
            assert report.consistent, name

    def test_random_corpus_lattice(self):
        for law in random_law_corpus(100, seed=12345):
            report = bt.classify_moment_conditions(TailFamily.finite(law))
            assert report.consistent
            # finite support: every verdict finite, certificates exact
            for cs in (report.xi_log_xi, report.xi_log_nu, report.nu_log_nu):
                assert cs.finite and cs.tail_bound <= 1e-8
