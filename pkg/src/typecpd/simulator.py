"""Data generation and Monte Carlo estimation of undetected-error and erasure
probabilities, including worst-case-over-C grids and resolution
phase-transition sweeps.

Reproducibility contract: every trial draws from its own stream keyed by
(seed, alpha_index, trial_index) through numpy's SeedSequence, and
aggregation is integer addition, so results are bit-identical for a fixed
seed regardless of how many workers execute the trials.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .detector import detect
from .errors import InputError
from .model import (
    CategoricalDistribution,
    ProblemConfig,
    SymbolSequence,
    ThresholdMode,
    iceil,
    ifloor,
)

_WILSON_Z95 = 1.959963984540054

_DEFAULT_ALPHA_GRID_POINTS = 21


@dataclass(frozen=True, eq=False)
class TrialSpec:
    """One Monte Carlo experiment: distributions, sizes, change fraction, seed.

    ``alpha`` is the change fraction C/n; ``alpha=None`` selects worst-case
    grid mode, evaluating every point of ``alpha_grid`` (default: 21 evenly
    spaced points in [theta, 1-theta]) and reporting per-point maxima.  The
    exhaustive maximum over all C in I_theta would cost O(n) full experiments;
    the grid is a documented approximation of it.
    """

    p1: CategoricalDistribution
    p2: CategoricalDistribution
    n: int
    r: float
    theta: float
    alpha: float | None
    trials: int
    seed: int
    alpha_grid: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.p1.alphabet_size != self.p2.alphabet_size:
            raise InputError("distributions must share one alphabet")
        if float(np.max(np.abs(self.p1.probs - self.p2.probs))) <= 1e-12:
            raise InputError("distributions must differ")
        if self.n < 2:
            raise InputError("n must be at least 2")
        if not self.r > 0.0:
            raise InputError("r must be positive")
        if not 0.0 < self.theta < 0.5:
            raise InputError("theta must lie in (0, 1/2)")
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if self.seed < 0:
            raise InputError("seed must be a non-negative integer")
        for alpha in self.evaluated_alphas():
            self._validate_alpha(alpha)

    def _validate_alpha(self, alpha: float) -> None:
        if not self.theta - 1e-12 <= alpha <= 1.0 - self.theta + 1e-12:
            raise InputError(
                f"alpha={alpha!r} outside [theta, 1-theta]=[{self.theta}, "
                f"{1.0 - self.theta}]"
            )
        change = iceil(alpha * self.n)
        lo = iceil(self.theta * self.n)
        hi = ifloor((1.0 - self.theta) * self.n)
        if not lo <= change <= hi:
            raise InputError(
                f"change-point C={change} for alpha={alpha!r} falls outside "
                f"I_theta=[{lo}, {hi}]"
            )

    @property
    def train_length(self) -> int:
        return iceil(self.r * self.n)

    def evaluated_alphas(self) -> tuple[float, ...]:
        if self.alpha is not None:
            return (self.alpha,)
        if self.alpha_grid is not None:
            return self.alpha_grid
        grid = np.linspace(self.theta, 1.0 - self.theta, _DEFAULT_ALPHA_GRID_POINTS)
        return tuple(float(a) for a in grid)


@dataclass(frozen=True)
class CellResult:
    """Per-(alpha, C) tallies; counts partition the cell's trials."""

    alpha: float
    change_point: int
    undetected: int
    erasure: int
    correct: int
    trials: int


@dataclass(frozen=True)
class MonteCarloReport:
    """Aggregated verdict tallies.

    In single-alpha mode the rates equal counts/trials.  In grid mode the
    counts are totals across all grid cells (and still partition ``trials``),
    while ``undetected_rate`` and ``erasure_rate`` are the per-cell maxima,
    mirroring the worst case over the true change-point; ``per_c_breakdown``
    carries the exact per-cell pairs.
    """

    undetected_count: int
    erasure_count: int
    correct_count: int
    trials: int
    undetected_rate: float
    erasure_rate: float
    wilson_95_halfwidth: float
    per_c_breakdown: tuple[CellResult, ...] | None = None


@dataclass(frozen=True)
class SweepRow:
    delta_bar: float
    n: int
    lam: float
    undetected_rate: float
    erasure_rate: float
    wilson_halfwidth: float


def wilson_halfwidth(successes: int, trials: int, z: float = _WILSON_Z95) -> float:
    """Halfwidth of the Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise InputError("successes must lie in [0, trials]")
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    return (z / denom) * math.sqrt(
        p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials)
    )


def _sample_inverse_cdf(
    probs: np.ndarray, uniforms: np.ndarray
) -> np.ndarray:
    """Categorical sampling through the precomputed cumulative table."""
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, uniforms, side="right")
    return np.minimum(idx, probs.size - 1).astype(np.int64)


def generate(
    spec: TrialSpec, trial_index: int, alpha_index: int = 0
) -> tuple[SymbolSequence, SymbolSequence, SymbolSequence, int]:
    """Draw one (x, y1, y2, C) tuple: x[1..C] ~ P1, x[C+1..n] ~ P2,
    y1 ~ P1^N, y2 ~ P2^N.

    Deterministic function of (seed, alpha_index, trial_index); the uniforms
    are consumed in the fixed order x, y1, y2.
    """
    if trial_index < 0:
        raise InputError("trial_index must be non-negative")
    alphas = spec.evaluated_alphas()
    if not 0 <= alpha_index < len(alphas):
        raise InputError(f"alpha_index={alpha_index} out of range")
    alpha = alphas[alpha_index]
    spec._validate_alpha(alpha)
    n = spec.n
    train_length = spec.train_length
    change = iceil(alpha * n)
    k = spec.p1.alphabet_size

    rng = np.random.default_rng([spec.seed, alpha_index, trial_index])
    u = rng.random(n + 2 * train_length)
    x = np.empty(n, dtype=np.int64)
    x[:change] = _sample_inverse_cdf(spec.p1.probs, u[:change])
    x[change:] = _sample_inverse_cdf(spec.p2.probs, u[change:n])
    y1 = _sample_inverse_cdf(spec.p1.probs, u[n : n + train_length])
    y2 = _sample_inverse_cdf(spec.p2.probs, u[n + train_length :])
    return (
        SymbolSequence(x, k),
        SymbolSequence(y1, k),
        SymbolSequence(y2, k),
        change,
    )


def _run_chunk(
    spec: TrialSpec,
    config: ProblemConfig,
    alpha_index: int,
    start: int,
    stop: int,
) -> tuple[int, int, int, int]:
    """Tally (alpha_index, undetected, erasure, correct) over a trial range."""
    undetected = erasure = correct = 0
    for trial_index in range(start, stop):
        x, y1, y2, change = generate(spec, trial_index, alpha_index)
        verdict = detect(x, y1, y2, config)
        if verdict.is_erasure:
            erasure += 1
        elif abs(verdict.index - change) <= config.delta:
            correct += 1
        else:
            undetected += 1
    return alpha_index, undetected, erasure, correct


def _chunk_ranges(trials: int, workers: int) -> list[tuple[int, int]]:
    width = math.ceil(trials / workers)
    return [(s, min(s + width, trials)) for s in range(0, trials, width)]


def estimate(
    spec: TrialSpec, config: ProblemConfig, workers: int = 1
) -> MonteCarloReport:
    """Monte Carlo estimate of undetected-error and erasure probabilities.

    Each trial is classified as undetected (declared index outside
    [C +- delta]), erasure, or correct.  ``workers`` > 1 fans trials out to a
    process pool; the fixed per-trial streams and commutative integer
    aggregation keep the report identical for any worker count.
    """
    if workers < 1:
        raise InputError("workers must be at least 1")
    if config.n != spec.n:
        raise InputError(
            f"config.n={config.n} does not match spec.n={spec.n}"
        )
    alphas = spec.evaluated_alphas()
    tallies = {
        i: {"undetected": 0, "erasure": 0, "correct": 0} for i in range(len(alphas))
    }
    tasks = [
        (i, start, stop)
        for i in range(len(alphas))
        for start, stop in _chunk_ranges(spec.trials, workers)
    ]
    if workers == 1:
        results = [_run_chunk(spec, config, *task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_chunk, spec, config, *task) for task in tasks
            ]
            results = [f.result() for f in futures]
    for alpha_index, undetected, erasure, correct in results:
        cell = tallies[alpha_index]
        cell["undetected"] += undetected
        cell["erasure"] += erasure
        cell["correct"] += correct

    cells = tuple(
        CellResult(
            alpha=alphas[i],
            change_point=iceil(alphas[i] * spec.n),
            undetected=tallies[i]["undetected"],
            erasure=tallies[i]["erasure"],
            correct=tallies[i]["correct"],
            trials=spec.trials,
        )
        for i in range(len(alphas))
    )
    total_undetected = sum(c.undetected for c in cells)
    total_erasure = sum(c.erasure for c in cells)
    total_correct = sum(c.correct for c in cells)
    total_trials = spec.trials * len(alphas)

    if len(cells) == 1:
        only = cells[0]
        return MonteCarloReport(
            undetected_count=only.undetected,
            erasure_count=only.erasure,
            correct_count=only.correct,
            trials=only.trials,
            undetected_rate=only.undetected / only.trials,
            erasure_rate=only.erasure / only.trials,
            wilson_95_halfwidth=wilson_halfwidth(only.erasure, only.trials),
            per_c_breakdown=None,
        )
    worst_undetected = max(c.undetected / c.trials for c in cells)
    worst_erasure_cell = max(cells, key=lambda c: c.erasure / c.trials)
    return MonteCarloReport(
        undetected_count=total_undetected,
        erasure_count=total_erasure,
        correct_count=total_correct,
        trials=total_trials,
        undetected_rate=worst_undetected,
        erasure_rate=worst_erasure_cell.erasure / worst_erasure_cell.trials,
        wilson_95_halfwidth=wilson_halfwidth(
            worst_erasure_cell.erasure, worst_erasure_cell.trials
        ),
        per_c_breakdown=cells,
    )


def physical_resolution(
    n: int, delta_bar: float, mode: ThresholdMode, t: float = 0.0
) -> int:
    """Samples of resolution for a normalized value: ceil(n * delta_bar) in
    the large-deviations modes, ceil(n**(1 - t/2) * delta_bar) under the
    moderate-deviations threshold."""
    if delta_bar < 0.0:
        raise InputError("delta_bar must be non-negative")
    if mode is ThresholdMode.MODERATE_DEV:
        return iceil(n ** (1.0 - t / 2.0) * delta_bar)
    return iceil(n * delta_bar)


def phase_transition_sweep(
    spec: TrialSpec,
    config: ProblemConfig,
    delta_bar_grid: list[float] | tuple[float, ...] | np.ndarray,
    workers: int = 1,
) -> list[SweepRow]:
    """Run ``estimate`` across a grid of normalized resolutions.

    Each delta_bar maps to samples through ``physical_resolution``.  Rows come
    back ordered by delta_bar.
    """
    cap = (1.0 - 2.0 * spec.theta) / 2.0
    grid = [float(d) for d in delta_bar_grid]
    if not grid:
        raise InputError("delta_bar_grid must be non-empty")
    for delta_bar in grid:
        if not 0.0 <= delta_bar < cap:
            raise InputError(
                f"delta_bar={delta_bar!r} outside the domain [0, {cap})"
            )
    rows = []
    for delta_bar in sorted(grid):
        run_config = dataclasses.replace(
            config,
            delta=physical_resolution(
                spec.n, delta_bar, config.threshold_mode, config.t
            ),
        )
        report = estimate(spec, run_config, workers=workers)
        rows.append(
            SweepRow(
                delta_bar=delta_bar,
                n=spec.n,
                lam=config.lam,
                undetected_rate=report.undetected_rate,
                erasure_rate=report.erasure_rate,
                wilson_halfwidth=report.wilson_95_halfwidth,
            )
        )
    return rows
