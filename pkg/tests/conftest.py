import random

from hypothesis import assume
from hypothesis import strategies as st

import branchtrees as bt

# ages drawn small so enumeration oracles and solvers stay desk-scale
ages_vectors = st.lists(st.integers(1, 5), min_size=1, max_size=4).map(
    lambda xs: tuple(sorted(xs))
)


@st.composite
def finite_laws(draw, min_mean=None, max_atoms=3):
    """Random canonical laws with integer-ratio masses (exact sums)."""
    n = draw(st.integers(1, max_atoms))
    atoms = draw(
        st.lists(
            st.tuples(st.integers(1, 9), ages_vectors), min_size=n, max_size=n
        )
    )
    p0_weight = draw(st.integers(0, 6))
    total = p0_weight + sum(w for w, _ in atoms)
    law = bt.validate_law(
        p0_weight / total, [(w / total, ages) for w, ages in atoms]
    )
    if min_mean is not None:
        assume(bt.offspring_marginal(law).mean > min_mean)
    return law


@st.composite
def offspring_pmfs(draw, min_mean=1.05, need_multiple=True):
    """Random supercritical offspring-count pmfs."""
    weights = draw(st.lists(st.integers(0, 9), min_size=3, max_size=6))
    assume(sum(weights) > 0)
    total = sum(weights)
    pmf = {k: w / total for k, w in enumerate(weights) if w}
    mean = sum(k * p for k, p in pmf.items())
    assume(mean > min_mean)
    if need_multiple:
        assume(any(k >= 2 for k in pmf))
    return pmf


def random_law_corpus(count, seed, min_mean=1.05):
    """Seeded corpus of supercritical finite laws for lattice checks."""
    rnd = random.Random(seed)
    laws = []
    while len(laws) < count:
        atoms = []
        for _ in range(rnd.randint(1, 3)):
            k = rnd.randint(1, 4)
            atoms.append((rnd.randint(1, 9), tuple(sorted(rnd.randint(1, 5) for _ in range(k)))))
        p0_weight = rnd.randint(0, 6)
        total = p0_weight + sum(w for w, _ in atoms)
        law = bt.validate_law(p0_weight / total, [(w / total, a) for w, a in atoms])
        if bt.offspring_marginal(law).mean > min_mean:
            laws.append(law)
    return laws
