"""Size-biased (spine) life law.

An immortal mother draws an enhanced life: an ordinary bearing-age
vector plus the rank ``j`` of the daughter who continues the immortal
line.  The mass of (atom with ages ``n_1..n_k``, rank ``j``) is

    exp(-alpha * n_j) * p_k(n_1, ..., n_k),

which is a probability table exactly when ``alpha`` solves the
growth-rate equation.  The age ``n_j`` at which the immortal daughter is
born is the regeneration age; its pmf is ``exp(-alpha n) m_n`` and its
mean is the childbearing-age mean ``beta``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import NotMalthusianError
from .laws import LifeOutcome, ReproductionLaw, litter_means
from .malthus import discounted_litter_sum

ALPHA_RESIDUAL_LIMIT = 1e-9


class SpineLife(NamedTuple):
    """A life plus the immortal daughter's rank; rank 0 marks a mortal."""

    rank: int
    life: LifeOutcome

    @property
    def regeneration_age(self) -> int:
        """Birth age of the immortal daughter (rank must be >= 1)."""
        return self.life.ages[self.rank - 1]


class SpineAtom(NamedTuple):
    ages: tuple[int, ...]
    rank: int
    mass: float


@dataclass(frozen=True)
class SpineLaw:
    """Explicit table for the tilted life-and-rank distribution."""

    base: ReproductionLaw
    alpha: float
    table: tuple[SpineAtom, ...]
    regeneration_pmf: dict[int, float]

    @property
    def total_mass(self) -> float:
        return math.fsum(entry.mass for entry in self.table)


def build_spine_law(law: ReproductionLaw, alpha: float) -> SpineLaw:
    """Materialize the tilted table at a solved growth rate.

    Refuses when ``alpha`` leaves the table unnormalized by more than
    ``ALPHA_RESIDUAL_LIMIT``, since everything downstream assumes the
    table is a probability distribution.
    """
    residual = abs(discounted_litter_sum(law, alpha) - 1.0)
    if not math.isfinite(residual) or residual > ALPHA_RESIDUAL_LIMIT:
        raise NotMalthusianError(
            f"alpha={alpha!r} leaves residual {residual:.3e}; "
            "solve the growth-rate equation first"
        )
    table = []
    for atom in law.atoms:
        for j, age in enumerate(atom.ages, start=1):
            table.append(SpineAtom(atom.ages, j, math.exp(-alpha * age) * atom.mass))
    regen = {
        n: math.exp(-alpha * n) * mn for n, mn in litter_means(law).by_age.items()
    }
    return SpineLaw(base=law, alpha=alpha, table=tuple(table), regeneration_pmf=regen)


def spine_offspring_marginal(spine: SpineLaw) -> dict[int, float]:
    """Tilted offspring-count pmf ``sum_j table[k, j]``.

    For an all-ages-one law this reduces to the classical size biasing
    ``k p_k / m``.
    """
    pmf: dict[int, float] = {}
    for entry in spine.table:
        k = len(entry.ages)
        pmf[k] = pmf.get(k, 0.0) + entry.mass
    return dict(sorted(pmf.items()))


def immortal_rank_marginal(spine: SpineLaw) -> dict[int, float]:
    """Distribution of the immortal daughter's rank ``j``."""
    pmf: dict[int, float] = {}
    for entry in spine.table:
        pmf[entry.rank] = pmf.get(entry.rank, 0.0) + entry.mass
    return dict(sorted(pmf.items()))


@lru_cache(maxsize=256)
def _spine_sampling_table(table: tuple[SpineAtom, ...]):
    cums, drawn, acc = [], [], 0.0
    for entry in table:
        acc += entry.mass
        cums.append(acc)
        drawn.append(SpineLife(entry.rank, LifeOutcome(entry.ages)))
    return tuple(cums), tuple(drawn)


def sample_spine_life(spine: SpineLaw, rng) -> SpineLife:
    """Draw (rank, life) from the table; the rank is always >= 1."""
    cums, drawn = _spine_sampling_table(spine.table)
    return drawn[min(bisect_right(cums, rng.random()), len(drawn) - 1)]
