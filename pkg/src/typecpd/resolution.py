"""Optimal-resolution calculators for both asymptotic regimes, the r->inf
limits, and a normal-approximation diagnostic for the erasure probability.

Large deviations (t = 0): the normalized resolution solves G_min(d) = lambda,
where G_min is the minimum of two boundary GJS values and is strictly
increasing on [0, (1-2 theta)/2); the inverse is found by bisection.  Above
the supremum the answer saturates at (1-2 theta)/2.

Moderate deviations (t in (0, 1/2)): closed form
sqrt(2 lambda (1-theta)(1-theta+r) / (r * sym_chi2(P1, P2))); t itself only
rescales the physical resolution n**(1-t/2) and does not enter the normalized
value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .detector import type_counting_slack
from .divergence import _gjs, _kl, sym_chi2
from .errors import InputError
from .model import CategoricalDistribution, iceil, ifloor

_BISECT_MAX_ITER = 200
_BISECT_WIDTH_TOL = 1e-12
_VALUE_REL_TOL = 1e-10
_DOMAIN_EDGE = 1e-12
_SATURATION_TOL = 1e-9


class Regime(Enum):
    LARGE_DEVIATIONS = "ld"
    MODERATE_DEVIATIONS = "md"


class Side(Enum):
    LEFT_OF_C = "left"
    RIGHT_OF_C = "right"


class Saturated(Exception):
    """Signals lambda at or above G_min((1-2 theta)/2); the resolution caps."""


@dataclass(frozen=True, eq=False)
class RegimeQuery:
    """Inputs shared by both resolution calculators."""

    p1: CategoricalDistribution
    p2: CategoricalDistribution
    r: float
    theta: float
    lam: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.p1.alphabet_size != self.p2.alphabet_size:
            raise InputError("distributions must share one alphabet")
        if not (self.p1.is_full_support and self.p2.is_full_support):
            raise InputError("full support required")
        if float(np.max(np.abs(self.p1.probs - self.p2.probs))) <= 1e-12:
            raise InputError("distributions must differ")
        if not self.r > 0.0:
            raise InputError("r must be positive")
        if not 0.0 < self.theta < 0.5:
            raise InputError("theta must lie in (0, 1/2)")
        if self.lam < 0.0:
            raise InputError("lambda must be non-negative")
        if not 0.0 <= self.t < 0.5:
            raise InputError("t must lie in [0, 1/2)")


@dataclass(frozen=True)
class ResolutionResult:
    normalized_resolution: float
    regime: Regime
    saturated: bool


def _validate_pair(p1: CategoricalDistribution, p2: CategoricalDistribution) -> None:
    if p1.alphabet_size != p2.alphabet_size:
        raise InputError("distributions must share one alphabet")


def resolution_cap(theta: float) -> float:
    """Upper edge (1-2 theta)/2 of the normalized-resolution domain."""
    if not 0.0 < theta < 0.5:
        raise InputError("theta must lie in (0, 1/2)")
    return (1.0 - 2.0 * theta) / 2.0


def g_min(
    delta_bar: float,
    p1: CategoricalDistribution,
    p2: CategoricalDistribution,
    theta: float,
    r: float,
) -> float:
    """Minimum of the two boundary GJS values at normalized resolution delta_bar:

        min{ r*GJS(t*P1 + (1-t)*P2, P2, (1-theta)/r),
             r*GJS((1-t)*P1 + t*P2, P1, (1-theta)/r) },   t = delta_bar/(1-theta).

    Strictly increasing on [0, (1-2 theta)/2) with G_min(0) = 0.
    """
    _validate_pair(p1, p2)
    if not r > 0.0:
        raise InputError("r must be positive")
    cap = resolution_cap(theta)
    if not 0.0 <= delta_bar < cap:
        raise InputError(
            f"delta_bar={delta_bar!r} outside the domain [0, {cap})"
        )
    t = delta_bar / (1.0 - theta)
    a = (1.0 - theta) / r
    mix_low = t * p1.probs + (1.0 - t) * p2.probs
    mix_high = (1.0 - t) * p1.probs + t * p2.probs
    return min(
        r * _gjs(mix_low, p2.probs, a),
        r * _gjs(mix_high, p1.probs, a),
    )


def _invert_increasing(func, lam: float, hi: float) -> float:
    """Bisection for func(d) = lam on [0, hi]; func increasing, func(0) = 0."""
    lo = 0.0
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        value = func(mid)
        if abs(value - lam) <= _VALUE_REL_TOL * max(1.0, lam):
            return mid
        if value < lam:
            lo = mid
        else:
            hi = mid
        if hi - lo < _BISECT_WIDTH_TOL:
            break
    return 0.5 * (lo + hi)


def invert_g_min(
    lam: float,
    p1: CategoricalDistribution,
    p2: CategoricalDistribution,
    theta: float,
    r: float,
) -> float:
    """Solve G_min(d) = lam by bisection on the monotone G_min.

    Raises ``Saturated`` when lam reaches the supremum of G_min over the
    domain (evaluated at the right endpoint minus 1e-12, with a 1e-9 guard
    band), in which case the caller should use (1-2 theta)/2.
    """
    if not lam > 0.0:
        raise InputError("lambda must be positive")
    cap = resolution_cap(theta)
    edge = cap - _DOMAIN_EDGE
    supremum = g_min(edge, p1, p2, theta, r)
    if lam >= supremum - _SATURATION_TOL:
        raise Saturated(
            f"lambda={lam!r} at or above G_min sup={supremum!r}"
        )
    return _invert_increasing(
        lambda d: g_min(d, p1, p2, theta, r), lam, edge
    )


def optimal_resolution_ld(query: RegimeQuery) -> ResolutionResult:
    """Large-deviations optimal normalized resolution:

    G_min^{-1}(lambda) for lambda in (0, G_min((1-2 theta)/2)), otherwise the
    saturated value (1-2 theta)/2.
    """
    if not query.lam > 0.0:
        raise InputError("lambda must be positive in the large-deviations regime")
    try:
        value = invert_g_min(query.lam, query.p1, query.p2, query.theta, query.r)
    except Saturated:
        return ResolutionResult(
            normalized_resolution=resolution_cap(query.theta),
            regime=Regime.LARGE_DEVIATIONS,
            saturated=True,
        )
    return ResolutionResult(
        normalized_resolution=value,
        regime=Regime.LARGE_DEVIATIONS,
        saturated=False,
    )


def optimal_resolution_md(query: RegimeQuery) -> ResolutionResult:
    """Moderate-deviations optimal normalized resolution (closed form):

        sqrt(2 lambda (1-theta)(1-theta+r) / (r * sym_chi2(P1, P2))).

    Zero exactly at lambda = 0; scales as sqrt(lambda).
    """
    if not 0.0 < query.t < 0.5:
        raise InputError(
            "t must lie in (0, 1/2) in the moderate-deviations regime"
        )
    value = math.sqrt(
        2.0
        * query.lam
        * (1.0 - query.theta)
        * (1.0 - query.theta + query.r)
        / (query.r * sym_chi2(query.p1, query.p2))
    )
    return ResolutionResult(
        normalized_resolution=value,
        regime=Regime.MODERATE_DEVIATIONS,
        saturated=False,
    )


def optimal_resolution_r_infinity(
    p1: CategoricalDistribution,
    p2: CategoricalDistribution,
    theta: float,
    lam: float,
    regime: Regime,
) -> float:
    """Limit of the optimal normalized resolution as r -> inf.

    With unbounded training data the underlying distributions are effectively
    known: the large-deviations curve inverts
    (1-theta)*min{D(mix-||P2), D(mix+||P1)} with the same boundary mixtures as
    G_min, and the moderate-deviations value is sqrt(2 lambda (1-theta) /
    sym_chi2(P1, P2)).
    """
    _validate_pair(p1, p2)
    if not (p1.is_full_support and p2.is_full_support):
        raise InputError("full support required")
    if float(np.max(np.abs(p1.probs - p2.probs))) <= 1e-12:
        raise InputError("distributions must differ")
    if lam < 0.0:
        raise InputError("lambda must be non-negative")
    if regime is Regime.MODERATE_DEVIATIONS:
        return math.sqrt(2.0 * lam * (1.0 - theta) / sym_chi2(p1, p2))
    if not lam > 0.0:
        raise InputError("lambda must be positive in the large-deviations regime")
    cap = resolution_cap(theta)

    def g_limit(delta_bar: float) -> float:
        t = delta_bar / (1.0 - theta)
        mix_low = t * p1.probs + (1.0 - t) * p2.probs
        mix_high = (1.0 - t) * p1.probs + t * p2.probs
        return (1.0 - theta) * min(_kl(mix_low, p2.probs), _kl(mix_high, p1.probs))

    edge = cap - _DOMAIN_EDGE
    if lam >= g_limit(edge) - _SATURATION_TOL:
        return cap
    return _invert_increasing(g_limit, lam, edge)


def variance_v(
    q1: CategoricalDistribution,
    q2: CategoricalDistribution,
    j: int,
    n: int,
    r: float,
    side: Side,
) -> float:
    """Variance of the linearized L statistic at split j, with N = ceil(r*n).

    For j left of the change-point (m = n - j), and symmetrically for the
    right side (m = j):

        V = (m/n) * Var_{Q1}[ ln((m+N) Q1(X) / (m Q1(X) + N Q2(X))) ]
            + r  * Var_{Q2}[ ln((m+N) Q2(X) / (m Q1(X) + N Q2(X))) ].

    Expectations are exact sums over the alphabet.  Zero exactly when
    Q1 = Q2 (every log ratio vanishes almost surely).
    """
    _validate_pair(q1, q2)
    if not (q1.is_full_support and q2.is_full_support):
        raise InputError("zero-mass symbols are not allowed")
    if n < 2 or not 1 <= j <= n - 1:
        raise InputError(f"split j={j} outside [1, {n - 1}]")
    if not r > 0.0:
        raise InputError("r must be positive")
    if np.array_equal(q1.probs, q2.probs):
        return 0.0
    train_length = iceil(r * n)
    m = (n - j) if side is Side.LEFT_OF_C else j
    denom = m * q1.probs + train_length * q2.probs
    log1 = np.log((m + train_length) * q1.probs / denom)
    log2 = np.log((m + train_length) * q2.probs / denom)
    var1 = float(np.sum(q1.probs * log1**2) - np.sum(q1.probs * log1) ** 2)
    var2 = float(np.sum(q2.probs * log2**2) - np.sum(q2.probs * log2) ** 2)
    return (m / n) * max(var1, 0.0) + r * max(var2, 0.0)


def _phi(x: float) -> float:
    """Standard normal CDF."""
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def erasure_normal_approx(query: RegimeQuery, n: int, delta_bar: float) -> float:
    """Gaussian diagnostic for the erasure probability at finite n.

    Evaluates Phi((lambda~ - r*GJS(.)) * sqrt(n^2 / ((m + r*n) * V))) on both
    boundary mixtures induced by ``delta_bar`` at the worst-case change-point
    and returns the larger value.  ``lambda~`` is the large-deviations
    achievability threshold lambda + sigma_n.  This is a diagnostic
    approximation, not a guarantee.
    """
    if n < 2:
        raise InputError("n must be at least 2")
    theta = query.theta
    if not 0.0 <= delta_bar < 1.0 - theta:
        raise InputError(
            f"delta_bar={delta_bar!r} outside [0, 1-theta) for theta={theta}"
        )
    train_length = iceil(query.r * n)
    lam_tilde = query.lam + type_counting_slack(
        n, train_length, query.p1.alphabet_size
    )
    t = delta_bar / (1.0 - theta)
    a = (1.0 - theta) / query.r
    j_left = min(max(iceil(theta * n), 1), n - 1)
    j_right = min(max(ifloor((1.0 - theta) * n), 1), n - 1)

    def side_value(mix: np.ndarray, anchor: CategoricalDistribution,
                   j: int, m: int, side: Side) -> float:
        gap = lam_tilde - query.r * _gjs(mix, anchor.probs, a)
        variance = variance_v(
            CategoricalDistribution(mix), anchor, j, n, query.r, side
        )
        scale_denom = (m + query.r * n) * variance
        if scale_denom <= 0.0:
            return _phi(math.inf if gap > 0 else (-math.inf if gap < 0 else 0.0))
        return _phi(gap * math.sqrt(n * n / scale_denom))

    mix_low = t * query.p1.probs + (1.0 - t) * query.p2.probs
    mix_high = (1.0 - t) * query.p1.probs + t * query.p2.probs
    left = side_value(mix_low, query.p2, j_left, n - j_left, Side.LEFT_OF_C)
    right = side_value(mix_high, query.p1, j_right, j_right, Side.RIGHT_OF_C)
    return max(left, right)
