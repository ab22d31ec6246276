import math
from collections import Counter

import pytest

import branchtrees as bt
from branchtrees import BUILTIN_LAWS

from statutil import chisquare_pvalue, four_se

LAW_A = BUILTIN_LAWS["LAW-A"]
LAW_B = BUILTIN_LAWS["LAW-B"]
LAW_D = BUILTIN_LAWS["LAW-D"]
LAW_E = BUILTIN_LAWS["LAW-E"]

GOLDEN_X = (math.sqrt(5.0) - 1.0) / 2.0


def spine_of(law):
    return bt.build_spine_law(law, bt.solve_malthusian(law).alpha)


class TestEnumerateStoppedTrees:
    def test_extinct_law_single_tree(self):
        for n in (0, 2, 5):
            atlas = bt.enumerate_stopped_trees(LAW_E, n)
            assert len(atlas.entries) == 1
            assert atlas.total_mass == 1.0

    def test_deterministic_law_single_tree(self):
        for n in range(7):
            atlas = bt.enumerate_stopped_trees(LAW_B, n)
            assert len(atlas.entries) == 1
            (p,) = atlas.entries.values()
            assert p == 1.0

    def test_law_a_level_zero(self):
        atlas = bt.enumerate_stopped_trees(LAW_A, 0)
        probs = sorted(atlas.entries.values())
        assert probs == [0.25, 0.75]

    def test_law_a_atlas_sizes_and_mass(self):
        # two outcomes per vertex make the atlas sizes satisfy
        # count(n) = 1 + count(n-1)^2
        sizes = {}
        for n in range(4):
            atlas = bt.enumerate_stopped_trees(LAW_A, n)
            sizes[n] = len(atlas.entries)
            assert abs(atlas.total_mass - 1.0) <= 1e-12
        assert sizes == {0: 2, 1: 5, 2: 26, 3: 677}

    def test_entry_cap(self):
        with pytest.raises(bt.AtlasTooLargeError):
            bt.enumerate_stopped_trees(LAW_A, 3, max_entries=100)

    def test_probabilities_match_direct_recursion(self):
        # independent oracle: recompute P(t) from the tree structure by
        # multiplying outcome masses vertex by vertex
        masses = {(): 0.25, (1, 1): 0.75}

        def direct(tree):
            p = masses[tree.life.ages]
            for child in tree.children:
                p *= direct(child)
            return p

        atlas = bt.enumerate_stopped_trees(LAW_A, 3)
        for enc, p in atlas.entries.items():
            assert abs(p - direct(atlas.trees[enc])) <= 1e-15


class TestEnumerateSpinedTrees:
    def test_law_b_level_one_hand_recursion(self):
        atlas = bt.enumerate_spined_trees(spine_of(LAW_B), 1)
        x = GOLDEN_X
        by_ranks = {ranks: p for (_enc, ranks), p in atlas.spined.items()}
        assert set(by_ranks) == {(2,), (1, 1), (1, 2)}
        assert abs(by_ranks[(2,)] - x**2) <= 1e-12
        assert abs(by_ranks[(1, 1)] - x * x) <= 1e-12
        assert abs(by_ranks[(1, 2)] - x**3) <= 1e-12
        assert abs(atlas.spined_mass - 1.0) <= 1e-12

    def test_chain_law_has_unique_spined_tree(self):
        chain = bt.validate_law(0.0, [(1.0, [1])])
        atlas = bt.enumerate_spined_trees(spine_of(chain), 4)
        assert len(atlas.spined) == 1
        ((_, ranks), p), = atlas.spined.items()
        assert ranks == (1,) * 5
        assert abs(p - 1.0) <= 1e-12

    def test_law_a_spined_mass_level_three(self):
        atlas = bt.enumerate_spined_trees(spine_of(LAW_A), 3)
        assert abs(atlas.spined_mass - 1.0) <= 1e-12

    def test_spine_tips_live_in_the_coming_generation(self):
        atlas = bt.enumerate_spined_trees(spine_of(LAW_A), 2)
        for (enc, ranks), p in atlas.spined.items():
            assert p > 0.0
            tree = atlas.trees[enc]
            stub_paths = {
                tuple(lbl.path) for lbl, _b in bt.coming_generation(tree)
            }
            assert ranks in stub_paths


class TestChangeOfMeasure:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_law_a_exact(self, n):
        report = bt.verify_change_of_measure(LAW_A, spine_of(LAW_A), n)
        assert report.passed
        assert report.max_deviation < 1e-12
        assert abs(report.tree_mass - 1.0) <= 1e-12
        assert abs(report.spined_mass - 1.0) <= 1e-12

    def test_law_b_exact_level_six(self):
        report = bt.verify_change_of_measure(LAW_B, spine_of(LAW_B), 6)
        assert report.passed and report.tree_count == 1

    def test_periodic_law_refused(self):
        with pytest.raises(bt.PeriodicError):
            bt.verify_change_of_measure(LAW_D, spine_of(LAW_D), 3)


class TestMartingale:
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_law_a_mean_and_one_step(self, n):
        alpha = bt.solve_malthusian(LAW_A).alpha
        report = bt.verify_martingale_mean(LAW_A, alpha, n)
        assert report.mean_deviation <= 1e-12
        assert report.onestep_deviation <= 1e-12

    def test_law_b_mean_exact(self):
        alpha = bt.solve_malthusian(LAW_B).alpha
        report = bt.verify_martingale_mean(LAW_B, alpha, 5)
        assert report.mean_deviation <= 1e-12

    def test_extinct_law_refused(self):
        with pytest.raises(bt.NoReproductionError):
            bt.verify_martingale_mean(LAW_E, 0.0, 1)

    def test_extensions_conserve_probability(self):
        atlas = bt.enumerate_stopped_trees(LAW_A, 2)
        for enc in atlas.entries:
            exts = bt.tree_extensions(atlas.trees[enc], LAW_A)
            assert abs(math.fsum(q for _t, q in exts) - 1.0) <= 1e-12
            for ext, _q in exts:
                assert ext.level == 3


class TestSamplerAgainstOracle:
    def test_stopped_tree_sampler_matches_atlas(self):
        n, reps = 2, 30_000
        atlas = bt.enumerate_stopped_trees(LAW_A, n)
        counts = Counter()
        for i in range(reps):
            tree = bt.grow_stopped_tree(LAW_A, n, bt.replicate_stream(404, i))
            counts[tree.canonical()] += 1
        for enc, p in atlas.entries.items():
            margin = max(four_se(p, reps), 5.0 / reps)
            assert abs(counts[enc] / reps - p) <= margin
        assert chisquare_pvalue(atlas.entries, counts, reps) > 0.001

    def test_spined_sampler_matches_spined_atlas(self):
        n, reps = 2, 30_000
        spine = spine_of(LAW_A)
        atlas = bt.enumerate_spined_trees(spine, n)
        counts = Counter()
        for i in range(reps):
            st = bt.grow_spined_tree(spine, n, bt.replicate_stream(505, i))
            counts[(st.tree.canonical(), st.ranks)] += 1
        assert chisquare_pvalue(atlas.spined, counts, reps) > 0.001
