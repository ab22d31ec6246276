"""Individual reproduction laws and single-life quantities.

A law assigns probability ``p0`` to childlessness and a mass to each
ordered vector of bearing ages ``(n_1, ..., n_k)`` with
``1 <= n_1 <= ... <= n_k``.  A drawn vector is one individual life: the
ages at which her successive daughters are born.  All laws here have
finite support, which is what makes the exact enumeration and the exact
series identities elsewhere in the package possible.

Derived per-law quantities:

* offspring marginal ``p_k`` and mean ``m = sum k p_k``,
* litter means ``m_n`` (expected number of daughters borne at exact age
  ``n``), with ``sum_n m_n = m``,
* per-life discounted offspring value
  ``xi = sum_i exp(-alpha * tau_i)``.
"""

from __future__ import annotations

import math
import operator
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .errors import BadAgesError, NonProbabilityError

# Sum-to-one enforced to MASS_TOL after canonicalization; raw inputs off by
# less than RENORM_LIMIT are treated as float round-off and renormalized,
# anything worse is rejected as a user error.
MASS_TOL = 1e-12
RENORM_LIMIT = 1e-9


class LifeOutcome(NamedTuple):
    """One individual life: the nondecreasing tuple of bearing ages.

    ``nu`` is the offspring count.  An empty tuple is the childless
    outcome.  (A NamedTuple, not a dataclass: one of these is built per
    sampled vertex and exponential trees make that construction hot.)
    """

    ages: tuple[int, ...]

    @property
    def nu(self) -> int:
        return len(self.ages)

    @property
    def last_bearing_age(self) -> int:
        """Age at the final bearing; 0 for the childless life."""
        return self.ages[-1] if self.ages else 0


EMPTY_LIFE = LifeOutcome(())


class Atom(NamedTuple):
    mass: float
    ages: tuple[int, ...]


@dataclass(frozen=True)
class ReproductionLaw:
    """Finite-support distribution over lives, in canonical form.

    Canonical means: atoms sorted by their ages tuple, no duplicate ages
    tuples, no zero-mass atoms, and ``p0 + sum(masses) = 1`` to
    ``MASS_TOL``.  Instances are immutable and safe to share across
    workers.  Build them through :func:`validate_law`.
    """

    p0: float
    atoms: tuple[Atom, ...]

    @property
    def max_age(self) -> int:
        return max((a.ages[-1] for a in self.atoms), default=0)

    def outcomes(self) -> list[tuple[LifeOutcome, float]]:
        """All (life, mass) pairs, childless outcome first."""
        pairs = []
        if self.p0 > 0.0:
            pairs.append((EMPTY_LIFE, self.p0))
        pairs.extend((LifeOutcome(a.ages), a.mass) for a in self.atoms)
        return pairs


class OffspringMarginal(NamedTuple):
    pmf: dict[int, float]
    mean: float


@dataclass(frozen=True)
class LitterMeans:
    """Expected litter sizes by age: ``by_age[n]`` is the mean number of
    daughters borne at exact age ``n``; ``total`` equals the offspring
    mean ``m``."""

    by_age: dict[int, float]
    total: float

    def support(self) -> list[int]:
        return sorted(n for n, v in self.by_age.items() if v > 0.0)


def validate_law(p0: float, atoms: Iterable[tuple[float, Sequence[int]]]) -> ReproductionLaw:
    """Canonicalize and validate raw law data.

    Duplicate ages vectors are merged by summing mass, zero-mass atoms
    dropped, atoms sorted by ages.  Raises ``NonProbabilityError`` if the
    masses are out of range or miss 1 by more than ``RENORM_LIMIT``
    (smaller deviations are renormalized away), ``BadAgesError`` for
    empty, non-integer, non-positive or decreasing ages.
    """
    p0 = float(p0)
    if not 0.0 <= p0 <= 1.0 + MASS_TOL:
        raise NonProbabilityError(f"p0 = {p0!r} outside [0, 1]")

    merged: dict[tuple[int, ...], float] = {}
    for mass, ages in atoms:
        mass = float(mass)
        if not 0.0 <= mass <= 1.0 + MASS_TOL:
            raise NonProbabilityError(f"atom mass {mass!r} outside [0, 1]")
        ages_t = _checked_ages(ages)
        merged[ages_t] = merged.get(ages_t, 0.0) + mass

    total = p0 + sum(merged.values())
    if abs(total - 1.0) > RENORM_LIMIT:
        raise NonProbabilityError(
            f"masses sum to {total!r}, off from 1 by more than {RENORM_LIMIT}"
        )
    if total != 1.0:
        p0 /= total
        merged = {k: v / total for k, v in merged.items()}

    canon = tuple(Atom(merged[k], k) for k in sorted(merged) if merged[k] > 0.0)
    law = ReproductionLaw(p0=p0, atoms=canon)
    assert abs(law.p0 + sum(a.mass for a in law.atoms) - 1.0) <= MASS_TOL
    return law


def _checked_ages(ages: Sequence[int]) -> tuple[int, ...]:
    if len(ages) == 0:
        raise BadAgesError("empty ages list; childless mass belongs in p0")
    out = []
    prev = 0
    for raw in ages:
        if isinstance(raw, bool):
            raise BadAgesError(f"age {raw!r} is not an integer")
        if isinstance(raw, float):
            if not raw.is_integer():
                raise BadAgesError(f"age {raw!r} is not an integer")
            raw = int(raw)
        try:
            a = operator.index(raw)
        except TypeError:
            raise BadAgesError(f"age {raw!r} is not an integer") from None
        if a < 1:
            raise BadAgesError(f"age {a} must be >= 1")
        if a < prev:
            raise BadAgesError(f"ages must be nondecreasing, got {list(ages)}")
        out.append(a)
        prev = a
    return tuple(out)


def offspring_marginal(law: ReproductionLaw) -> OffspringMarginal:
    """Marginal pmf of the offspring count and its mean."""
    pmf: dict[int, float] = {0: law.p0} if law.p0 > 0.0 else {}
    for atom in law.atoms:
        k = len(atom.ages)
        pmf[k] = pmf.get(k, 0.0) + atom.mass
    mean = sum(k * p for k, p in pmf.items())
    return OffspringMarginal(dict(sorted(pmf.items())), mean)


def litter_means(law: ReproductionLaw) -> LitterMeans:
    """Mean number of daughters borne at each exact age."""
    by_age: dict[int, float] = {}
    for atom in law.atoms:
        for age in atom.ages:
            by_age[age] = by_age.get(age, 0.0) + atom.mass
    by_age = dict(sorted(by_age.items()))
    return LitterMeans(by_age, sum(by_age.values()))


def reproductive_value(life: LifeOutcome, alpha: float) -> float:
    """Discounted offspring value ``sum_i exp(-alpha * tau_i)``.

    Empty life gives 0.  At the solved growth rate this has mean 1 over
    the law.
    """
    return math.fsum(math.exp(-alpha * a) for a in life.ages)


def mean_reproductive_value(law: ReproductionLaw, alpha: float) -> float:
    """Mix of :func:`reproductive_value` over the law's outcomes."""
    return math.fsum(
        mass * reproductive_value(life, alpha) for life, mass in law.outcomes()
    )


@lru_cache(maxsize=256)
def _sampling_table(law: ReproductionLaw) -> tuple[tuple[float, ...], tuple[LifeOutcome, ...]]:
    """Cumulative masses and shared life objects, in canonical order."""
    cums, lives, acc = [], [], 0.0
    for life, mass in law.outcomes():
        acc += mass
        cums.append(acc)
        lives.append(life)
    return tuple(cums), tuple(lives)


def sample_life(law: ReproductionLaw, rng) -> LifeOutcome:
    """Draw one life; ``rng`` must expose ``random()`` returning U(0,1).

    Inversion on the canonical ordering (p0 first, then atoms), so the
    draw is reproducible for a fixed stream.  Returned life objects are
    shared (they are immutable).
    """
    cums, lives = _sampling_table(law)
    # bisect lands past the end only by float round-off at u ~ 1
    return lives[min(bisect_right(cums, rng.random()), len(lives) - 1)]


# Named laws used by the CLI (``--law builtin:NAME``), the test-suite and
# the README examples.
#   LAW-A: two daughters at age 1 w.p. 3/4, none otherwise (supercritical GW)
#   LAW-B: always one daughter at age 1 and one at age 2 (deterministic)
#   LAW-D: always two daughters at age 2 (delayed, period 2)
#   LAW-E: certain childlessness (immediate extinction)
BUILTIN_LAWS: dict[str, ReproductionLaw] = {
    "LAW-A": validate_law(0.25, [(0.75, (1, 1))]),
    "LAW-B": validate_law(0.0, [(1.0, (1, 2))]),
    "LAW-D": validate_law(0.0, [(1.0, (2, 2))]),
    "LAW-E": validate_law(1.0, []),
}
