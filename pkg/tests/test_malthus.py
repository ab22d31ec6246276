import math

import pytest
from hypothesis import given, settings

import branchtrees as bt
from branchtrees import BUILTIN_LAWS

from conftest import finite_laws, offspring_pmfs

LAW_A = BUILTIN_LAWS["LAW-A"]
LAW_B = BUILTIN_LAWS["LAW-B"]
LAW_D = BUILTIN_LAWS["LAW-D"]

GOLDEN_X = (math.sqrt(5.0) - 1.0) / 2.0  # root of x + x^2 = 1
ALPHA_A = math.log(1.5)
ALPHA_B = -math.log(GOLDEN_X)
ALPHA_D = math.log(2.0) / 2.0


class TestSolveMalthusian:
    def test_law_a_closed_form(self):
        sol = bt.solve_malthusian(LAW_A)
        assert abs(sol.alpha - ALPHA_A) <= 1e-10
        assert abs(sol.beta - 1.0) <= 1e-10
        assert sol.criticality == "supercritical"
        assert sol.residual < 1e-10

    def test_law_b_golden_ratio(self):
        sol = bt.solve_malthusian(LAW_B)
        assert abs(sol.alpha - ALPHA_B) <= 1e-10
        # beta = x + 2 x^2 = 2 - x
        assert abs(sol.beta - (2.0 - GOLDEN_X)) <= 1e-10

    def test_law_d_delayed(self):
        sol = bt.solve_malthusian(LAW_D)
        assert abs(sol.alpha - ALPHA_D) <= 1e-10
        assert abs(sol.beta - 2.0) <= 1e-10

    def test_no_reproduction(self):
        with pytest.raises(bt.NoReproductionError):
            bt.solve_malthusian(BUILTIN_LAWS["LAW-E"])

    @given(finite_laws(min_mean=0.01))
    @settings(max_examples=80, deadline=None)
    def test_solution_properties(self, law):
        sol = bt.solve_malthusian(law)
        assert sol.exists
        assert sol.residual <= 1e-12
        assert sol.beta >= 1.0 - 1e-12
        # sign of alpha tracks criticality
        mean = bt.offspring_marginal(law).mean
        if mean > 1.0 + 1e-9:
            assert sol.alpha > 0.0
        elif mean < 1.0 - 1e-9:
            assert sol.alpha < 0.0
        # E(xi) = 1 at the solution, via the per-life mixing route
        assert abs(bt.mean_reproductive_value(law, sol.alpha) - 1.0) <= 1e-10


class TestCriticality:
    @pytest.mark.parametrize(
        "law, expected",
        [
            (LAW_A, "supercritical"),
            (bt.validate_law(0.0, [(1.0, [1])]), "critical"),
            (bt.validate_law(0.75, [(0.25, [1])]), "subcritical"),
        ],
    )
    def test_classify(self, law, expected):
        assert bt.classify_criticality(law) == expected


class TestPeriod:
    def test_mixed_ages_aperiodic(self):
        assert bt.law_period(LAW_B) == 1

    def test_delayed_has_period_two(self):
        assert bt.law_period(LAW_D) == 2

    def test_coprime_support(self):
        law = bt.validate_law(0.0, [(0.5, [2]), (0.5, [3])])
        assert bt.law_period(law) == 1

    def test_rescale_law_d(self):
        rescaled = bt.rescale_time(LAW_D, 2)
        assert rescaled == bt.validate_law(0.0, [(1.0, [1, 1])])
        assert bt.law_period(rescaled) == 1

    def test_rescale_identity(self):
        assert bt.rescale_time(LAW_B, 1) is LAW_B

    def test_rescale_not_divisible(self):
        with pytest.raises(bt.NotDivisibleError):
            bt.rescale_time(LAW_B, 2)

    @given(finite_laws(min_mean=0.01))
    @settings(max_examples=40, deadline=None)
    def test_rescale_scales_alpha(self, law):
        # stretch every age by 3, then rescaling back divides time by 3,
        # so the stretched law's rate is a third of the original's
        stretched = bt.validate_law(
            law.p0, [(a.mass, tuple(3 * x for x in a.ages)) for a in law.atoms]
        )
        alpha = bt.solve_malthusian(law).alpha
        alpha3 = bt.solve_malthusian(stretched).alpha
        assert abs(alpha3 - alpha / 3.0) <= 1e-10
        assert bt.rescale_time(stretched, 3) == law


class TestSingleDistributionSolvers:
    def test_longitudinal_two_children(self):
        # E(x^nu) = 2 - 1/x with nu = 2 is the cubic x^3 - 2x + 1 = 0
        alpha2 = bt.solve_longitudinal_alpha({2: 1.0})
        assert abs(alpha2 - ALPHA_B) <= 1e-10

    def test_longitudinal_is_the_ages_1_to_k_law(self):
        alpha2 = bt.solve_longitudinal_alpha({2: 1.0})
        assert abs(alpha2 - bt.solve_malthusian(LAW_B).alpha) <= 1e-10

    def test_longitudinal_cross_check_generic_solver(self):
        pmf = {0: 0.25, 2: 0.75}
        law = bt.validate_law(0.25, [(0.75, [1, 2])])
        assert (
            abs(bt.solve_longitudinal_alpha(pmf) - bt.solve_malthusian(law).alpha)
            <= 1e-10
        )

    def test_delayed_two_children(self):
        assert abs(bt.solve_delayed_alpha({2: 1.0}) - ALPHA_D) <= 1e-10

    def test_delayed_cross_check_generic_solver(self):
        pmf = {0: 0.25, 2: 0.75}
        law = bt.validate_law(0.25, [(0.75, [2, 2])])
        assert (
            abs(bt.solve_delayed_alpha(pmf) - bt.solve_malthusian(law).alpha) <= 1e-10
        )

    def test_single_child_is_critical(self):
        with pytest.raises(bt.NotSupercriticalError):
            bt.solve_delayed_alpha({1: 1.0})
        with pytest.raises(bt.NotSupercriticalError):
            bt.solve_longitudinal_alpha({1: 1.0})

    def test_subcritical_rejected(self):
        with pytest.raises(bt.NotSupercriticalError):
            bt.solve_longitudinal_alpha({0: 0.8, 2: 0.2})

    @given(offspring_pmfs())
    @settings(max_examples=60, deadline=None)
    def test_rate_ordering(self, pmf):
        # delayed < longitudinal < plain ln(m), strictly, whenever some
        # sibship has two or more members
        mean = sum(k * p for k, p in pmf.items())
        a1 = math.log(mean)
        a2 = bt.solve_longitudinal_alpha(pmf)
        a3 = bt.solve_delayed_alpha(pmf)
        assert a3 < a2 < a1
        assert a2 - a3 > 0.0 and a1 - a2 > 0.0
