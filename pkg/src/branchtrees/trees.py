"""Stopped random trees, with and without an immortal line.

A tree stopped at level ``n`` contains every individual born at time
``<= n`` together with her complete life, so children born after ``n``
are known to exist (their birth times are fixed by the mother's life)
but have not drawn lives of their own.  Those children are the coming
generation; they are kept as implicit stubs: an age entry of a
materialized vertex that exceeds the vertex's remaining level.

Trees are ordered: a vertex's daughters keep the index order of her
ages vector (nondecreasing ages, ties in drawn order), so two trees are
equal exactly when their nested life structure is equal.  Vertex labels
are paths of daughter indices from the root.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from math import exp
from typing import NamedTuple

from .errors import DepthBudgetError
from .laws import LifeOutcome, ReproductionLaw, _sampling_table
from .size_biased import SpineLaw, _spine_sampling_table

DEFAULT_VERTEX_BUDGET = 10**6


@dataclass(frozen=True)
class VertexLabel:
    """Path of 1-based daughter indices; the empty path is the root."""

    path: tuple[int, ...]

    def child(self, index: int) -> "VertexLabel":
        return VertexLabel(self.path + (index,))

    def __str__(self) -> str:
        return "0" if not self.path else ".".join(map(str, self.path))


ROOT = VertexLabel(())


class StoppedTree(NamedTuple):
    """Recursive stopped tree.

    ``level`` is the remaining observation depth at this root; the
    subtree under daughter ``i`` (age ``a_i <= level``) has level
    ``level - a_i``.  Because ages are nondecreasing the materialized
    daughters are exactly the first ``len(children)`` entries of
    ``life.ages``; the remaining entries are coming-generation stubs.
    (NamedTuple for cheap construction; millions are built per Monte
    Carlo run.)
    """

    level: int
    life: LifeOutcome
    children: tuple["StoppedTree", ...]

    @property
    def stub_ages(self) -> tuple[int, ...]:
        return self.life.ages[len(self.children):]

    def canonical(self):
        """Hashable nested encoding (ages, child encodings); two stopped
        trees of equal level are equal iff their encodings are."""
        return (self.life.ages, tuple(c.canonical() for c in self.children))

    def vertex_count(self) -> int:
        return 1 + sum(c.vertex_count() for c in self.children)

    def is_extinct(self) -> bool:
        """True when the population has died out by the stopping level."""
        return not self.stub_ages and all(c.is_extinct() for c in self.children)


@dataclass(frozen=True)
class SpinedTree:
    """A stopped tree plus its immortal line.

    ``ranks`` lists the immortal-daughter ranks chosen by the spine
    vertices in order, so the label of the u-th spine vertex is simply
    the prefix ``ranks[:u]``.  The final spine vertex is always a stub
    (first spine birth past the level); all earlier ones are
    materialized.
    """

    tree: StoppedTree
    ranks: tuple[int, ...]

    @property
    def tip_generation(self) -> int:
        """Generation of the first spine member past the level."""
        return len(self.ranks)

    @property
    def spine(self) -> tuple[VertexLabel, ...]:
        return tuple(
            VertexLabel(self.ranks[:u]) for u in range(len(self.ranks) + 1)
        )


def grow_stopped_tree(
    law: ReproductionLaw,
    n: int,
    rng,
    max_vertices: int = DEFAULT_VERTEX_BUDGET,
) -> StoppedTree:
    """Sample a tree stopped at level ``n``.

    The root draws a life; each daughter born at or below ``n`` grows an
    independent stopped subtree of the remaining depth.  Raises
    ``DepthBudgetError`` once more than ``max_vertices`` lives have been
    drawn (supercritical trees grow exponentially; a hard error beats a
    silent truncation).
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    budget = [max_vertices]
    return _grow(_sampling_table(law), n, rng, budget)


def _grow(table, level: int, rng, budget: list[int]) -> StoppedTree:
    # table is the law's cached (cumulative masses, lives) pair; hoisted
    # out of the recursion because this runs once per vertex
    budget[0] -= 1
    if budget[0] < 0:
        raise DepthBudgetError("vertex budget exhausted while growing tree")
    cums, lives = table
    i = bisect_right(cums, rng.random())
    life = lives[i if i < len(lives) else -1]
    kids = []
    for a in life.ages:
        if a > level:
            break
        kids.append(_grow(table, level - a, rng, budget))
    return StoppedTree(level, life, tuple(kids))


def grow_spined_tree(
    spine_law: SpineLaw,
    n: int,
    rng,
    max_vertices: int = DEFAULT_VERTEX_BUDGET,
) -> SpinedTree:
    """Sample a stopped tree carrying an immortal line.

    Spine vertices draw enhanced lives from the tilted law and hand the
    spine to the daughter their rank designates; everyone else draws
    from the base law.  The spine ends at the first member born past
    ``n``, who remains a stub.
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    budget = [max_vertices]
    tables = (_spine_sampling_table(spine_law.table), _sampling_table(spine_law.base))
    tree, ranks = _grow_spined(tables, n, rng, budget)
    return SpinedTree(tree, tuple(ranks))


def _grow_spined(tables, level: int, rng, budget: list[int]) -> tuple[StoppedTree, list[int]]:
    budget[0] -= 1
    if budget[0] < 0:
        raise DepthBudgetError("vertex budget exhausted while growing tree")
    (s_cums, s_drawn), base_table = tables
    i = bisect_right(s_cums, rng.random())
    j, life = s_drawn[i if i < len(s_drawn) else -1]
    tail_ranks: list[int] = []
    children = []
    for idx, a in enumerate(life.ages):
        if a > level:
            break
        if idx == j - 1:
            sub, tail_ranks = _grow_spined(tables, level - a, rng, budget)
        else:
            sub = _grow(base_table, level - a, rng, budget)
        children.append(sub)
    return StoppedTree(level, life, tuple(children)), [j] + tail_ranks


def coming_generation(tree: StoppedTree) -> list[tuple[VertexLabel, int]]:
    """All stubs with their absolute birth times, depth first.

    Every returned birth time lies in ``(n, n + max_age]`` where ``n``
    is the tree's level.
    """
    out: list[tuple[VertexLabel, int]] = []
    _collect_stubs(tree, ROOT, 0, out)
    return out


def _collect_stubs(node, label, born, out):
    k_mat = len(node.children)
    for idx, a in enumerate(node.life.ages):
        if idx < k_mat:
            _collect_stubs(node.children[idx], label.child(idx + 1), born + a, out)
        else:
            out.append((label.child(idx + 1), born + a))


def coming_generation_value(tree: StoppedTree, alpha: float) -> float:
    """Discounted reproductive value ``sum exp(-alpha * sigma_y)`` over
    the coming generation.

    At the solved growth rate this is a mean-one martingale in the
    stopping level and the density of the size-biased tree law against
    the ordinary one; 0 exactly when the tree has died out.
    """
    return _value(tree, 0, alpha)


def _value(node, born, alpha):
    total = 0.0
    children = node.children
    k_mat = len(children)
    for idx, a in enumerate(node.life.ages):
        if idx < k_mat:
            total += _value(children[idx], born + a, alpha)
        else:
            total += exp(-alpha * (born + a))
    return total


def iter_vertices(tree: StoppedTree):
    """Yield (label, birth time, life) for every materialized vertex,
    depth first, root first."""
    stack = [(tree, ROOT, 0)]
    while stack:
        node, label, born = stack.pop()
        yield label, born, node.life
        for idx in range(len(node.children) - 1, -1, -1):
            stack.append(
                (node.children[idx], label.child(idx + 1), born + node.life.ages[idx])
            )


def spine_increments(st: SpinedTree) -> list[int]:
    """Ages between consecutive spine births, ending with the step that
    crosses the stopping level.  Their sum is the birth time of the
    spine's coming-generation member."""
    out = []
    node = st.tree
    for rank in st.ranks:
        age = node.life.ages[rank - 1]
        out.append(age)
        if age <= node.level:
            node = node.children[rank - 1]
    return out
