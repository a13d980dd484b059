"""Core domain objects shared by every other module.

Alphabets are index sets {0, ..., |X|-1}; external labels are mapped to
indices at ingestion time.  Distributions are validated at construction and
un-normalized inputs are rejected rather than re-normalized, so data errors
surface immediately.  All types are immutable after construction and safe to
share across threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, InputError

PROB_SUM_TOL = 1e-12

# Guard against float fuzz when real-valued boundaries (theta*n, r*n, alpha*n)
# land exactly on an integer, e.g. 0.1 * 1000 == 100.00000000000001.
_INT_FUZZ = 1e-9


def iceil(value: float) -> int:
    return int(math.ceil(value - _INT_FUZZ))


def ifloor(value: float) -> int:
    return int(math.floor(value + _INT_FUZZ))


@dataclass(frozen=True, eq=False)
class CategoricalDistribution:
    """Probability vector over a finite alphabet.

    Entries must be non-negative and sum to 1 within ``PROB_SUM_TOL``.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError("probability vector must be a non-empty 1-D sequence")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise InputError("probabilities must be finite and non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InputError(
                f"probabilities sum to {total!r}; expected 1 within {PROB_SUM_TOL}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.size)

    @property
    def is_full_support(self) -> bool:
        """True when every symbol has positive mass; chi-square ops require it."""
        return bool(np.all(self.probs > 0.0))

    @classmethod
    def bernoulli(cls, p: float) -> "CategoricalDistribution":
        """Two-symbol distribution (p, 1-p); Bern(p) puts mass p on symbol 0."""
        if not 0.0 <= p <= 1.0:
            raise InputError(f"bernoulli parameter must lie in [0, 1], got {p!r}")
        return cls(np.array([p, 1.0 - p]))

    @classmethod
    def uniform(cls, alphabet_size: int) -> "CategoricalDistribution":
        if alphabet_size < 1:
            raise InputError("alphabet size must be positive")
        return cls(np.full(alphabet_size, 1.0 / alphabet_size))


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """Sequence of alphabet indices (0-based)."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.symbols, dtype=np.int64)
        if arr.ndim != 1:
            raise InputError("symbol sequence must be 1-D")
        if self.alphabet_size < 1:
            raise InputError("alphabet size must be positive")
        if arr.size and (arr.min() < 0 or arr.max() >= self.alphabet_size):
            raise InputError(
                f"symbols must lie in [0, {self.alphabet_size - 1}]"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "symbols", arr)

    def __len__(self) -> int:
        return int(self.symbols.size)


@dataclass(frozen=True, eq=False)
class TypeVector:
    """Empirical distribution of a sequence, stored as counts plus length."""

    counts: np.ndarray
    length_total: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError("counts must be a non-empty 1-D vector")
        if np.any(arr < 0):
            raise InputError("counts must be non-negative")
        if self.length_total <= 0:
            raise InputError("length_total must be positive")
        if int(arr.sum()) != self.length_total:
            raise InputError(
                f"counts sum to {int(arr.sum())}, expected length_total={self.length_total}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @property
    def alphabet_size(self) -> int:
        return int(self.counts.size)

    def as_distribution(self) -> CategoricalDistribution:
        return CategoricalDistribution(self.counts / self.length_total)


@dataclass(frozen=True, eq=False)
class SubTypeTuple:
    """Four-way type split at a candidate change-point j.

    ``head``/``tail`` are the types of the test prefix x[1..j] and suffix
    x[j+1..n]; ``train1``/``train2`` are the full training-sequence types.
    """

    head: TypeVector
    tail: TypeVector
    train1: TypeVector
    train2: TypeVector
    split_index: int

    def __post_init__(self) -> None:
        if self.train1.length_total != self.train2.length_total:
            raise InputError("training sequences must have equal length")
        if self.split_index != self.head.length_total:
            raise InputError("split_index must equal the head length")
        sizes = {
            self.head.alphabet_size,
            self.tail.alphabet_size,
            self.train1.alphabet_size,
            self.train2.alphabet_size,
        }
        if len(sizes) != 1:
            raise InputError("all four types must share one alphabet")

    @property
    def test_length(self) -> int:
        return self.head.length_total + self.tail.length_total

    @property
    def train_length(self) -> int:
        return self.train1.length_total


class ThresholdMode(Enum):
    RAW = "raw"
    LARGE_DEV_ACHIEVABILITY = "ld"
    MODERATE_DEV = "md"


@dataclass(frozen=True)
class ProblemConfig:
    """Everything a single detection instance is parameterized by.

    ``n`` is the test length, ``r`` the training-to-test length ratio
    (N = ceil(r*n)), ``theta`` bounds the admissible change-point interval
    I_theta = [ceil(theta*n), floor((1-theta)*n)], ``lam`` the undetected-error
    exponent in nats, ``t`` the sub-exponential decay parameter, and ``delta``
    the allowed resolution in samples.
    """

    n: int
    r: float
    theta: float
    lam: float
    t: float = 0.0
    delta: int = 0
    threshold_mode: ThresholdMode = ThresholdMode.RAW
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InputError("test length n must be at least 2")
        if not self.r > 0.0:
            raise InputError("training ratio r must be positive")
        if not 0.0 < self.theta < 0.5:
            raise InputError("theta must lie in (0, 1/2)")
        if not self.lam > 0.0:
            raise InputError("lambda must be positive")
        if not 0.0 <= self.t < 0.5:
            raise InputError("t must lie in [0, 1/2)")
        if self.delta < 0:
            raise InputError("delta must be non-negative")
        if self.seed < 0:
            raise InputError("seed must be a non-negative integer")
        if self.i_theta_lo > self.i_theta_hi:
            raise ConfigError(
                f"admissible interval is empty for n={self.n}, theta={self.theta}"
            )

    @property
    def train_length(self) -> int:
        """N = ceil(r * n)."""
        return iceil(self.r * self.n)

    @property
    def i_theta_lo(self) -> int:
        return iceil(self.theta * self.n)

    @property
    def i_theta_hi(self) -> int:
        return ifloor((1.0 - self.theta) * self.n)

    @property
    def is_trivial(self) -> bool:
        """True when delta >= (1-2*theta)*n/2, where a constant guess succeeds."""
        return self.delta >= (1.0 - 2.0 * self.theta) * self.n / 2.0 - _INT_FUZZ


@dataclass(frozen=True)
class DecoderOutput:
    """Either a declared change-point index in I_theta or the erasure symbol."""

    index: int | None

    @classmethod
    def at(cls, index: int) -> "DecoderOutput":
        return cls(index=int(index))

    @classmethod
    def erasure(cls) -> "DecoderOutput":
        return cls(index=None)

    @property
    def is_erasure(self) -> bool:
        return self.index is None

    @property
    def is_change_point(self) -> bool:
        return self.index is not None


def type_of(seq: SymbolSequence, alphabet_size: int) -> TypeVector:
    """Empirical type of ``seq``: counts[a] = #{i : seq[i] = a}."""
    if len(seq) == 0:
        raise InputError("empty sequence")
    if alphabet_size < seq.alphabet_size:
        raise InputError(
            f"alphabet_size={alphabet_size} smaller than the sequence alphabet "
            f"{seq.alphabet_size}"
        )
    counts = np.bincount(seq.symbols, minlength=alphabet_size)
    return TypeVector(counts=counts, length_total=len(seq))


def split_types(
    x: SymbolSequence, j: int, y1: SymbolSequence, y2: SymbolSequence
) -> SubTypeTuple:
    """Sub-type tuple (head, tail, train1, train2) at split index j.

    Requires 1 <= j <= n-1 so both test parts are non-empty.
    """
    n = len(x)
    if not 1 <= j <= n - 1:
        raise InputError(f"split index j={j} out of range [1, {n - 1}]")
    if len(y1) != len(y2):
        raise InputError("training sequences must have equal length")
    k = max(x.alphabet_size, y1.alphabet_size, y2.alphabet_size)
    head = type_of(SymbolSequence(x.symbols[:j], x.alphabet_size), k)
    tail = type_of(SymbolSequence(x.symbols[j:], x.alphabet_size), k)
    return SubTypeTuple(
        head=head,
        tail=tail,
        train1=type_of(y1, k),
        train2=type_of(y2, k),
        split_index=j,
    )


def load_sequence(path: str | Path) -> SymbolSequence:
    """Read a symbol sequence from a file.

    Two formats are accepted: a JSON document {"alphabet_size": k,
    "symbols": [...]} or plain text with whitespace/newline separated integer
    symbols (alphabet size inferred as max symbol + 1).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(
                f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        if not isinstance(doc, dict) or "alphabet_size" not in doc or "symbols" not in doc:
            raise InputError(
                f"{path}: expected an object with 'alphabet_size' and 'symbols'"
            )
        return SymbolSequence(
            symbols=np.asarray(doc["symbols"], dtype=np.int64),
            alphabet_size=int(doc["alphabet_size"]),
        )
    symbols: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for colno, token in enumerate(line.split(), start=1):
            try:
                symbols.append(int(token))
            except ValueError as exc:
                raise InputError(
                    f"{path}: line {lineno}, token {colno}: "
                    f"not an integer symbol: {token!r}"
                ) from exc
    if not symbols:
        raise InputError(f"{path}: empty sequence")
    arr = np.asarray(symbols, dtype=np.int64)
    if arr.min() < 0:
        raise InputError(f"{path}: symbols must be non-negative")
    return SymbolSequence(symbols=arr, alphabet_size=int(arr.max()) + 1)


def load_distribution(path: str | Path) -> CategoricalDistribution:
    """Read a probability vector from a JSON list of floats."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, list):
        raise InputError(f"{path}: expected a JSON list of probabilities")
    return CategoricalDistribution(np.asarray(doc, dtype=np.float64))
