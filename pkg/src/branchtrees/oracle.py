"""Exact enumeration of stopped trees and exact verification.

Small stopping levels admit a complete list of the possible ordered
stopped trees with their probabilities, built by the product recursion

    P(t) = mass(root life) * prod over materialized daughters i
           of P(subtree of t at remaining level - age_i),

and the analogous spined recursion in which the daughter holding the
immortal line contributes the tilt factor exp(-alpha * age_j) times her
own spined sub-probability while the rest contribute plain
probabilities.  Sub-lists are memoized by remaining level because the
daughters' subtrees are i.i.d. copies.

These atlases are the package's independent oracle: the identity

    sum over spines y of Phat(t, y) = N(t) * P(t)

with N the coming-generation value is checked tree by tree, and the
martingale property of N is checked both in mean and one step at a
time over explicit level extensions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import fsum, prod

from .errors import AtlasTooLargeError, NoReproductionError, PeriodicError
from .laws import LifeOutcome, ReproductionLaw
from .malthus import law_period
from .size_biased import SpineLaw
from .trees import SpinedTree, StoppedTree, coming_generation_value

DEFAULT_ENTRY_CAP = 10**6


@dataclass(frozen=True)
class TreeAtlas:
    """Complete (tree -> probability) map at one stopping level.

    ``trees`` keeps the actual objects keyed by their canonical
    encodings; ``spined`` (when built) maps (tree encoding, spine rank
    tuple) to the tilted probability.
    """

    level: int
    entries: dict[tuple, float]
    trees: dict[tuple, StoppedTree]
    spined: dict[tuple, float] | None = None

    @property
    def total_mass(self) -> float:
        return fsum(self.entries.values())

    @property
    def spined_mass(self) -> float:
        if self.spined is None:
            raise ValueError("atlas has no spined entries")
        return fsum(self.spined.values())

    def spined_tree_marginal(self) -> dict[tuple, float]:
        """Tilted tree law: spine summed out per tree encoding."""
        if self.spined is None:
            raise ValueError("atlas has no spined entries")
        out: dict[tuple, float] = {}
        for (enc, _ranks), p in self.spined.items():
            out[enc] = out.get(enc, 0.0) + p
        return out


class _Budget:
    __slots__ = ("left",)

    def __init__(self, cap: int):
        self.left = cap

    def spend(self, k: int = 1) -> None:
        self.left -= k
        if self.left < 0:
            raise AtlasTooLargeError("enumeration exceeded the entry cap")


def enumerate_stopped_trees(
    law: ReproductionLaw, n: int, max_entries: int = DEFAULT_ENTRY_CAP
) -> TreeAtlas:
    """All ordered stopped trees at level ``n`` with exact probabilities."""
    if n < 0:
        raise ValueError("level must be >= 0")
    budget = _Budget(max_entries)
    memo: dict[int, list[tuple[StoppedTree, float]]] = {}
    top = _atlas_level(law, n, memo, budget)
    entries, trees = {}, {}
    for tree, p in top:
        enc = tree.canonical()
        entries[enc] = p
        trees[enc] = tree
    return TreeAtlas(level=n, entries=entries, trees=trees)


def _atlas_level(law, level, memo, budget) -> list[tuple[StoppedTree, float]]:
    got = memo.get(level)
    if got is not None:
        return got
    result: list[tuple[StoppedTree, float]] = []
    for life, mass in law.outcomes():
        mat_ages = [a for a in life.ages if a <= level]
        sub_lists = [_atlas_level(law, level - a, memo, budget) for a in mat_ages]
        for combo in itertools.product(*sub_lists):
            budget.spend()
            p = mass * prod(sp for _, sp in combo)
            result.append(
                (StoppedTree(level, life, tuple(t for t, _ in combo)), p)
            )
    memo[level] = result
    return result


def enumerate_spined_trees(
    spine_law: SpineLaw, n: int, max_entries: int = DEFAULT_ENTRY_CAP
) -> TreeAtlas:
    """All (stopped tree, spine) pairs at level ``n`` with their tilted
    probabilities; the plain entries come along for free."""
    if n < 0:
        raise ValueError("level must be >= 0")
    law = spine_law.base
    budget = _Budget(max_entries)
    memo: dict[int, list[tuple[StoppedTree, float]]] = {}
    smemo: dict[int, list[tuple[StoppedTree, tuple[int, ...], float]]] = {}
    top = _spined_level(spine_law, n, memo, smemo, budget)

    plain = _atlas_level(law, n, memo, budget)
    entries, trees = {}, {}
    for tree, p in plain:
        enc = tree.canonical()
        entries[enc] = p
        trees[enc] = tree
    spined = {}
    for tree, ranks, p in top:
        spined[(tree.canonical(), ranks)] = p
    return TreeAtlas(level=n, entries=entries, trees=trees, spined=spined)


def _spined_level(spine_law, level, memo, smemo, budget):
    got = smemo.get(level)
    if got is not None:
        return got
    law = spine_law.base
    result: list[tuple[StoppedTree, tuple[int, ...], float]] = []
    for entry in spine_law.table:
        ages = entry.ages
        j = entry.rank
        spine_age = ages[j - 1]
        mat_ages = [a for a in ages if a <= level]
        if spine_age > level:
            # spine exits here: every materialized daughter is ordinary
            sub_lists = [_atlas_level(law, level - a, memo, budget) for a in mat_ages]
            for combo in itertools.product(*sub_lists):
                budget.spend()
                p = entry.mass * prod(sp for _, sp in combo)
                tree = StoppedTree(
                    level, LifeOutcome(ages), tuple(t for t, _ in combo)
                )
                result.append((tree, (j,), p))
        else:
            spine_subs = _spined_level(spine_law, level - spine_age, memo, smemo, budget)
            other_lists = [
                _atlas_level(law, level - a, memo, budget)
                for idx, a in enumerate(mat_ages)
                if idx != j - 1
            ]
            for s_tree, s_ranks, s_p in spine_subs:
                for combo in itertools.product(*other_lists):
                    budget.spend()
                    children, it = [], iter(combo)
                    for idx in range(len(mat_ages)):
                        if idx == j - 1:
                            children.append(s_tree)
                        else:
                            children.append(next(it)[0])
                    p = entry.mass * s_p * prod(sp for _, sp in combo)
                    tree = StoppedTree(level, LifeOutcome(ages), tuple(children))
                    result.append((tree, (j,) + s_ranks, p))
    smemo[level] = result
    return result


@dataclass(frozen=True)
class MeasureReport:
    level: int
    tree_count: int
    spined_count: int
    max_deviation: float
    tree_mass: float
    spined_mass: float
    tolerance: float
    passed: bool


def verify_change_of_measure(
    law: ReproductionLaw,
    spine_law: SpineLaw,
    n: int,
    tol: float = 1e-12,
    max_entries: int = DEFAULT_ENTRY_CAP,
) -> MeasureReport:
    """Check, tree by tree, that summing the spined atlas over spines
    reproduces the coming-generation value times the plain probability.

    Requires a period-1 law; periodic laws should be rescaled first.
    """
    if law_period(law) != 1:
        raise PeriodicError(
            "law has period > 1; rescale_time it before verifying"
        )
    atlas = enumerate_spined_trees(spine_law, n, max_entries)
    by_tree = atlas.spined_tree_marginal()
    unknown = set(by_tree) - set(atlas.entries)
    if unknown:
        raise AssertionError("spined atlas contains trees missing from plain atlas")
    max_dev = 0.0
    for enc, p in atlas.entries.items():
        value = coming_generation_value(atlas.trees[enc], spine_law.alpha)
        dev = abs(by_tree.get(enc, 0.0) - value * p)
        if dev > max_dev:
            max_dev = dev
    return MeasureReport(
        level=n,
        tree_count=len(atlas.entries),
        spined_count=len(atlas.spined),
        max_deviation=max_dev,
        tree_mass=atlas.total_mass,
        spined_mass=atlas.spined_mass,
        tolerance=tol,
        passed=max_dev <= tol
        and abs(atlas.total_mass - 1.0) <= tol
        and abs(atlas.spined_mass - 1.0) <= tol,
    )


@dataclass(frozen=True)
class MartingaleReport:
    level: int
    tree_count: int
    mean_deviation: float
    onestep_deviation: float
    tolerance: float
    passed: bool


def verify_martingale_mean(
    law: ReproductionLaw,
    alpha: float,
    n: int,
    tol: float = 1e-12,
    max_entries: int = DEFAULT_ENTRY_CAP,
) -> MartingaleReport:
    """Exact martingale checks on the level-``n`` atlas.

    Mean: ``sum_t P(t) N(t)`` must be 1.  One step: for every tree the
    average of N over its explicit level-(n+1) extensions must equal
    N(t).  Both to ``tol``.
    """
    from .laws import litter_means

    if litter_means(law).total <= 0.0:
        raise NoReproductionError(
            "law has zero mean offspring; no growth rate, no martingale"
        )
    atlas = enumerate_stopped_trees(law, n, max_entries)
    mean = fsum(
        p * coming_generation_value(atlas.trees[enc], alpha)
        for enc, p in atlas.entries.items()
    )
    budget = _Budget(max_entries)
    onestep = 0.0
    for enc, _p in atlas.entries.items():
        tree = atlas.trees[enc]
        here = coming_generation_value(tree, alpha)
        cond = fsum(
            q * coming_generation_value(ext, alpha)
            for ext, q in tree_extensions(tree, law, budget)
        )
        onestep = max(onestep, abs(cond - here))
    mean_dev = abs(mean - 1.0)
    return MartingaleReport(
        level=n,
        tree_count=len(atlas.entries),
        mean_deviation=mean_dev,
        onestep_deviation=onestep,
        tolerance=tol,
        passed=mean_dev <= tol and onestep <= tol,
    )


def tree_extensions(
    tree: StoppedTree, law: ReproductionLaw, budget: _Budget | None = None
) -> list[tuple[StoppedTree, float]]:
    """All level-(n+1) continuations of ``tree`` with their conditional
    probabilities: each stub due exactly at n+1 draws a life, every
    other vertex is untouched."""
    if budget is None:
        budget = _Budget(DEFAULT_ENTRY_CAP)
    return _extend(tree, law, budget)


def _extend(node, law, budget):
    level = node.level
    slot_lists = []
    for idx, a in enumerate(node.life.ages):
        if idx < len(node.children):
            slot_lists.append(_extend(node.children[idx], law, budget))
        elif a == level + 1:
            slot_lists.append(
                [(StoppedTree(0, life, ()), mass) for life, mass in law.outcomes()]
            )
        else:
            break  # ages nondecreasing: everything further stays a stub
    out = []
    for combo in itertools.product(*slot_lists):
        budget.spend()
        out.append(
            (
                StoppedTree(level + 1, node.life, tuple(t for t, _ in combo)),
                prod(q for _, q in combo),
            )
        )
    return out
