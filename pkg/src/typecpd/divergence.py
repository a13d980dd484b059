"""Divergence functionals: KL, generalized Jensen-Shannon, the L statistic,
chi-square and its symmetrized version.

All values are in nats (natural-log units).  ``Nats`` is a plain float that is
non-negative and may be ``math.inf`` when absolute continuity fails; +inf is a
representable value for KL, while the chi-square operations instead reject
zero denominators because they are only used on full-support distributions.

Sums over the alphabet run in ascending symbol order with the conventions
0*ln(0) = 0 and 0*ln(0/0) = 0, implemented by summing only over symbols with
positive first-argument mass.  Compensated summation is not used; plain
float64 accumulation is adequate for alphabet sizes up to 2**16.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .model import CategoricalDistribution, SubTypeTuple

Nats = float


def _kl(p: np.ndarray, q: np.ndarray) -> Nats:
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        return math.inf
    pm = p[mask]
    total = float(np.sum(pm * np.log(pm / q[mask])))
    # Roundoff can leave a tiny negative residue for near-identical inputs.
    return max(0.0, total)


def _gjs(q1: np.ndarray, qt1: np.ndarray, a: float) -> Nats:
    if a == 0.0:
        return 0.0
    mixture = (a * q1 + qt1) / (a + 1.0)
    return a * _kl(q1, mixture) + _kl(qt1, mixture)


def _require_same_alphabet(
    p: CategoricalDistribution, q: CategoricalDistribution
) -> None:
    if p.alphabet_size != q.alphabet_size:
        raise InputError(
            f"alphabet sizes differ: {p.alphabet_size} vs {q.alphabet_size}"
        )


def kl(p: CategoricalDistribution, q: CategoricalDistribution) -> Nats:
    """Kullback-Leibler divergence D(p || q) = sum_x p(x) ln(p(x)/q(x)).

    Returns +inf when p(x) > 0 and q(x) = 0 for some symbol.
    """
    _require_same_alphabet(p, q)
    return _kl(p.probs, q.probs)


def gjs(
    q1: CategoricalDistribution, qt1: CategoricalDistribution, a: float
) -> Nats:
    """Generalized Jensen-Shannon divergence with mixing weight a >= 0:

        GJS(Q1, Q1~, a) = a*D(Q1 || M) + D(Q1~ || M),
        M = (a*Q1 + Q1~) / (a + 1).

    Finite for a > 0 because the mixture dominates both arguments; zero iff
    Q1 = Q1~ or a = 0.  At a = 1 it equals twice the Jensen-Shannon
    divergence.
    """
    _require_same_alphabet(q1, qt1)
    if a < 0.0:
        raise InputError(f"mixing weight a must be non-negative, got {a!r}")
    return _gjs(q1.probs, qt1.probs, a)


def l_statistic(types: SubTypeTuple, beta: float, r: float) -> Nats:
    """Weighted two-part distance between test sub-types and training types:

        L = r*GJS(T_head, T_train1, beta/r) + r*GJS(T_tail, T_train2, (1-beta)/r)

    with beta = split_index/n.  The head/train1 and tail/train2 pairing is
    pinned by the identity

        n*L = j*D(T_head||M1) + N*D(T_train1||M1)
              + (n-j)*D(T_tail||M2) + N*D(T_train2||M2),

    where M1 = (j*T_head + N*T_train1)/(j+N) and
    M2 = ((n-j)*T_tail + N*T_train2)/(n-j+N).
    """
    if not 0.0 < beta < 1.0:
        raise InputError(f"beta must lie in (0, 1), got {beta!r}")
    if not r > 0.0:
        raise InputError(f"r must be positive, got {r!r}")
    head = types.head.as_distribution()
    tail = types.tail.as_distribution()
    train1 = types.train1.as_distribution()
    train2 = types.train2.as_distribution()
    return r * gjs(head, train1, beta / r) + r * gjs(tail, train2, (1.0 - beta) / r)


def chi2(p1: CategoricalDistribution, p2: CategoricalDistribution) -> Nats:
    """Chi-square distance sum_x (p1(x)-p2(x))^2 / p2(x); p2 must have full support."""
    _require_same_alphabet(p1, p2)
    if not p2.is_full_support:
        raise InputError("full support required")
    diff = p1.probs - p2.probs
    return float(np.sum(diff * diff / p2.probs))


def sym_chi2(p1: CategoricalDistribution, p2: CategoricalDistribution) -> Nats:
    """Symmetrized chi-square distance min{chi2(p1||p2), chi2(p2||p1)}.

    Finite for every full-support pair; symmetric in its arguments.
    """
    return min(chi2(p1, p2), chi2(p2, p1))
