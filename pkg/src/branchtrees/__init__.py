"""Discrete-time branching processes with multiple bearing ages, viewed
as random trees: growth-rate solving, size-biased spine laws, tree
sampling, exact change-of-measure verification, population sums and
offspring moment conditions."""

from .characteristics import (
    EVER_BORN,
    NEWBORN,
    Characteristic,
    alive_with_lifespan,
    chi_bar,
    growth_ratio_estimate,
    population_sum,
    simulate_cohorts,
)
from .errors import (
    AllExtinctError,
    AlphaMissingError,
    AtlasTooLargeError,
    BadAgesError,
    BranchTreesError,
    DepthBudgetError,
    DivergesError,
    InputError,
    LawParseError,
    NonProbabilityError,
    NoReproductionError,
    NotDivisibleError,
    NotMalthusianError,
    NotSupercriticalError,
    PeriodicError,
    ToleranceNotReachedError,
    VerificationError,
)
from .lawfile import load_law, parse_law, resolve_law
from .laws import (
    BUILTIN_LAWS,
    EMPTY_LIFE,
    Atom,
    LifeOutcome,
    LitterMeans,
    ReproductionLaw,
    litter_means,
    mean_reproductive_value,
    offspring_marginal,
    reproductive_value,
    sample_life,
    validate_law,
)
from .malthus import (
    MalthusSolution,
    classify_criticality,
    discounted_age_sum,
    discounted_litter_sum,
    law_period,
    rescale_time,
    solve_delayed_alpha,
    solve_longitudinal_alpha,
    solve_malthusian,
)
from .oracle import (
    TreeAtlas,
    enumerate_spined_trees,
    enumerate_stopped_trees,
    tree_extensions,
    verify_change_of_measure,
    verify_martingale_mean,
)
from .size_biased import (
    SpineLaw,
    SpineLife,
    build_spine_law,
    immortal_rank_marginal,
    sample_spine_life,
    spine_offspring_marginal,
)
from .streams import replicate_stream
from .trees import (
    SpinedTree,
    StoppedTree,
    VertexLabel,
    coming_generation,
    coming_generation_value,
    grow_spined_tree,
    grow_stopped_tree,
    iter_vertices,
    spine_increments,
)
from .xlogx import (
    BUILTIN_FAMILIES,
    CertifiedSum,
    MomentReport,
    TailFamily,
    classify_moment_conditions,
    family_alpha,
    nu_log_nu,
    xi_log_nu,
    xi_log_xi,
)

__version__ = "0.1.0"
