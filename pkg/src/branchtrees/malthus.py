"""Growth-rate (Malthusian) equation and its special-case solvers.

The growth rate ``alpha`` of a law is the unique real root of

    f(alpha) = sum_n exp(-alpha * n) * m_n - 1,

with ``m_n`` the litter means.  For a finite-support law f is a finite
sum, strictly decreasing, with range (-1, inf), so the root always
exists once the law reproduces at all.  The derived quantity

    beta = sum_n n * exp(-alpha * n) * m_n

is the mean age at childbearing: the mean regeneration age of the
immortal line under the size-biased law.

Two one-parameter families defined by an offspring pmf alone get direct
solvers so their rates can be compared with the plain Galton-Watson rate
``ln m``:

* longitudinal: a life of ``nu`` years with one daughter each year,
  rate from ``E(x^nu) = 2 - 1/x`` at ``x = exp(-alpha)``;
* delayed: all ``nu`` daughters at age ``nu``, rate from
  ``E(nu * exp(-alpha * nu)) = 1``.

For any supercritical pmf with some mass at ``nu >= 2`` the three rates
order strictly: delayed < longitudinal < ln m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    NoReproductionError,
    NotDivisibleError,
    NotSupercriticalError,
    ToleranceNotReachedError,
)
from .laws import LitterMeans, ReproductionLaw, litter_means, validate_law

CRITICALITY_TOL = 1e-12
DEFAULT_TOL = 1e-12
BISECT_WIDTH = 1e-14
MAX_ITER = 400

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class MalthusSolution:
    alpha: float
    beta: float
    criticality: str
    residual: float
    exists: bool = True
    iterations: int = 0


def _exp(x: float) -> float:
    # bracketing can probe far-negative alpha; saturate instead of raising
    return math.exp(x) if x < 700.0 else math.inf


def discounted_litter_sum(law_or_means, alpha: float) -> float:
    """``sum_n exp(-alpha n) m_n``; equals 1 exactly at the growth rate."""
    lm = _as_means(law_or_means)
    return math.fsum(v * _exp(-alpha * n) for n, v in lm.by_age.items())


def discounted_age_sum(law_or_means, alpha: float) -> float:
    """``sum_n n exp(-alpha n) m_n``; the childbearing-age mean at alpha."""
    lm = _as_means(law_or_means)
    return math.fsum(n * v * _exp(-alpha * n) for n, v in lm.by_age.items())


def _as_means(law_or_means) -> LitterMeans:
    if isinstance(law_or_means, LitterMeans):
        return law_or_means
    return litter_means(law_or_means)


def classify_criticality(law: ReproductionLaw) -> str:
    m = litter_means(law).total
    if m > 1.0 + CRITICALITY_TOL:
        return SUPERCRITICAL
    if abs(m - 1.0) <= CRITICALITY_TOL:
        return CRITICAL
    return SUBCRITICAL


def law_period(law: ReproductionLaw) -> int:
    """gcd of the ages with positive litter mean; 1 means non-periodic."""
    lm = litter_means(law)
    if lm.total <= 0.0:
        raise NoReproductionError("law never reproduces; period undefined")
    return math.gcd(*lm.support())


def rescale_time(law: ReproductionLaw, d: int) -> ReproductionLaw:
    """Divide every bearing age by ``d`` (a new, coarser time unit).

    Used to bring a periodic law back to period 1.  ``d`` must divide
    every age in every atom.
    """
    if d == 1:
        return law
    if d < 1:
        raise NotDivisibleError(f"divisor must be >= 1, got {d}")
    for atom in law.atoms:
        for a in atom.ages:
            if a % d != 0:
                raise NotDivisibleError(f"age {a} not divisible by {d}")
    return validate_law(
        law.p0, [(atom.mass, tuple(a // d for a in atom.ages)) for atom in law.atoms]
    )


def solve_malthusian(law: ReproductionLaw, tol: float = DEFAULT_TOL) -> MalthusSolution:
    """Root of the growth-rate equation plus the childbearing-age mean.

    Brackets by doubling away from the initial guess ``ln m`` (already
    exact when every age is 1), bisects to width ``BISECT_WIDTH`` and
    polishes with Newton steps.  The returned residual is
    ``|sum exp(-alpha n) m_n - 1|``.
    """
    lm = litter_means(law)
    m = lm.total
    if m <= 0.0:
        raise NoReproductionError("law has zero mean offspring; no growth rate")
    crit = classify_criticality(law)

    def f(a: float) -> float:
        return discounted_litter_sum(lm, a) - 1.0

    alpha, iters = _solve_decreasing(f, guess=math.log(m))

    # Newton polish; f' = -discounted_age_sum < 0 always
    for _ in range(4):
        fa = f(alpha)
        if fa == 0.0:
            break
        deriv = -discounted_age_sum(lm, alpha)
        step = fa / deriv
        if not math.isfinite(step) or step == 0.0:
            break
        alpha -= step
        iters += 1

    residual = abs(f(alpha))
    if residual > tol:
        raise ToleranceNotReachedError(
            f"growth-rate residual {residual:.3e} above tol {tol:.3e}"
        )
    beta = discounted_age_sum(lm, alpha)
    return MalthusSolution(alpha, beta, crit, residual, True, iters)


def _solve_decreasing(f, guess: float, width: float = BISECT_WIDTH) -> tuple[float, int]:
    """Bisection root of a strictly decreasing function, bracketing by
    doubling steps away from ``guess``."""
    iters = 0
    f0 = f(guess)
    if f0 == 0.0:
        return guess, iters
    step = 0.5
    if f0 > 0.0:
        lo, hi = guess, guess + step
        while f(hi) > 0.0:
            lo, hi = hi, hi + step
            step *= 2.0
            iters += 1
            if iters > MAX_ITER:
                raise ToleranceNotReachedError("bracketing failed (upper)")
    else:
        lo, hi = guess - step, guess
        while f(lo) < 0.0:
            lo, hi = lo - step, lo
            step *= 2.0
            iters += 1
            if iters > MAX_ITER:
                raise ToleranceNotReachedError("bracketing failed (lower)")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        iters += 1
        if iters > MAX_ITER:
            raise ToleranceNotReachedError("bisection iteration cap hit")
    return 0.5 * (lo + hi), iters


def _pmf_mean(pmf: dict[int, float]) -> float:
    total = sum(pmf.values())
    if abs(total - 1.0) > 1e-9:
        raise NoReproductionError(f"offspring pmf sums to {total!r}, not 1")
    if any(k < 0 or p < 0 for k, p in pmf.items()):
        raise NoReproductionError("offspring pmf needs k >= 0 and p >= 0")
    return sum(k * p for k, p in pmf.items())


def _require_supercritical(m: float, what: str) -> None:
    if m <= 1.0 + CRITICALITY_TOL:
        kind = CRITICAL if abs(m - 1.0) <= CRITICALITY_TOL else SUBCRITICAL
        raise NotSupercriticalError(f"{what} needs mean offspring > 1, law is {kind}")


def solve_longitudinal_alpha(pmf: dict[int, float]) -> float:
    """Growth rate of the one-daughter-per-year life with span ``nu``.

    Solves ``E(x^nu) = 2 - 1/x`` for the root x in (0,1) other than the
    trivial x = 1, and returns ``-ln x``.  ``g(x) = E(x^nu) - 2 + 1/x``
    is convex with g(0+) = +inf, g(1) = 0 and g'(1) = m - 1 > 0, so that
    root is unique and bisection on a sign change is safe.
    """
    m = _pmf_mean(pmf)
    _require_supercritical(m, "longitudinal rate")

    def g(x: float) -> float:
        return math.fsum(p * x**k for k, p in pmf.items()) - 2.0 + 1.0 / x

    lo, hi = 1e-12, 1.0 - 1e-9
    if g(hi) >= 0.0:
        raise NotSupercriticalError("mean offspring too close to 1 to separate roots")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    x = 0.5 * (lo + hi)
    # Newton polish on g
    for _ in range(4):
        gx = g(x)
        deriv = math.fsum(k * p * x ** (k - 1) for k, p in pmf.items() if k >= 1)
        deriv -= 1.0 / (x * x)
        if deriv == 0.0:
            break
        nxt = x - gx / deriv
        if 0.0 < nxt < 1.0:
            x = nxt
    return -math.log(x)


def solve_delayed_alpha(pmf: dict[int, float]) -> float:
    """Growth rate when all ``nu`` daughters arrive at age ``nu``.

    Solves ``E(nu x^nu) = 1`` on x in (0,1); the left side increases
    from 0 to m, so a root exists exactly when m > 1.
    """
    m = _pmf_mean(pmf)
    _require_supercritical(m, "delayed rate")

    def h(x: float) -> float:
        return math.fsum(k * p * x**k for k, p in pmf.items() if k >= 1) - 1.0

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    x = 0.5 * (lo + hi)
    for _ in range(4):
        hx = h(x)
        deriv = math.fsum(k * k * p * x ** (k - 1) for k, p in pmf.items() if k >= 1)
        if deriv == 0.0:
            break
        nxt = x - hx / deriv
        if 0.0 < nxt < 1.0:
            x = nxt
    return -math.log(x)
