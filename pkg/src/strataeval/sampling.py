"""Deterministic seeded sampling and the two-phase allocation arithmetic.

The generator is splitmix64: tiny, bit-exact across platforms, and fully
described by one 64-bit state word, so every draw is reproducible from a
single seed.  Sampling without replacement is a partial Fisher-Yates
shuffle driven by that generator; results are returned sorted ascending
so draws have one canonical form.

Allocation follows the optimal (Neyman) scheme: stratum j receives a
fraction N_j*sigma_j / sum_i(N_i*sigma_i) of the total sample, and the
total needed for a target standard error se of the pooled proportion is

    n = (1/N) * (sum_j N_j*sigma_j)^2
        -----------------------------------------
        N * se^2  +  (1/N) * sum_j N_j*sigma_j^2

with N the population size.  Integer counts use largest-remainder
rounding so they always sum exactly to the requested total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Sequence

from .corpus import STRATUM_CLASSES, PosClass
from .errors import AllocationError, DrawError, UndersizedStratumError

if TYPE_CHECKING:
    from .corpus import Corpus

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class RandomState(NamedTuple):
    """Immutable splitmix64 state. Same seed, same sequence, any platform."""

    state: int = 0


def next_random(state: RandomState) -> tuple[int, RandomState]:
    """Advance splitmix64 one step; returns (64-bit value, new state)."""
    s = (state.state + _GOLDEN) & MASK64
    z = s
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    z ^= z >> 31
    return z, RandomState(s)


def derive_seed(seed: int, step: int = 0) -> int:
    """One splitmix64 step over ``seed + step``; used to fork substreams."""
    value, _ = next_random(RandomState((seed + step) & MASK64))
    return value


def sample_without_replacement(
    population: Sequence[int], k: int, state: RandomState
) -> tuple[list[int], RandomState]:
    """Draw ``k`` distinct items via partial Fisher-Yates, sorted ascending.

    Position i is swapped with position ``i + (r mod (n - i))`` for each
    i < k; the first k slots of the shuffled copy are the sample.
    """
    n = len(population)
    if k < 0 or k > n:
        raise DrawError(f"cannot draw {k} items from a population of {n}")
    pool = list(population)
    for i in range(k):
        value, state = next_random(state)
        j = i + value % (n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return sorted(pool[:k]), state


class StratumSpec(NamedTuple):
    """Population size and pilot standard deviation for one stratum."""

    pos: PosClass
    size: int
    sd: float


def _validate_strata(strata: Sequence[StratumSpec]) -> None:
    if not strata:
        raise AllocationError("at least one stratum is required")
    for spec in strata:
        if spec.size < 1:
            raise AllocationError(f"stratum {spec.pos.value} has size {spec.size} < 1")
        if not 0.0 <= spec.sd <= 0.5 + 1e-9:
            raise AllocationError(
                f"stratum {spec.pos.value} sd {spec.sd} outside [0, 0.5] (proportions only)"
            )


def neyman_fractions(strata: Sequence[StratumSpec]) -> list[float]:
    """Optimal allocation fractions f_j = N_j*sd_j / sum(N_i*sd_i)."""
    _validate_strata(strata)
    products = [spec.size * spec.sd for spec in strata]
    total = sum(products)
    if total <= 0.0:
        raise AllocationError("all N_j * sigma_j products are zero; allocation is degenerate")
    return [p / total for p in products]


class SampleSize(NamedTuple):
    real: float
    count: int  # ceiling of ``real``


def required_sample_size(strata: Sequence[StratumSpec], target_se: float) -> SampleSize:
    """Total sample size needed so the pooled proportion's SE is ``target_se``."""
    _validate_strata(strata)
    if target_se <= 0:
        raise ValueError("target_se must be positive")
    pop = sum(spec.size for spec in strata)
    weighted_sd = sum(spec.size * spec.sd for spec in strata)
    weighted_var = sum(spec.size * spec.sd * spec.sd for spec in strata)
    numerator = weighted_sd * weighted_sd / pop
    denominator = pop * target_se * target_se + weighted_var / pop
    real = numerator / denominator
    return SampleSize(real=real, count=math.ceil(real))


def allocate_counts(n_total: int, fractions: Sequence[float]) -> list[int]:
    """Integer stratum counts by largest-remainder rounding; sums to ``n_total``.

    Every count starts at floor(f_j * n); the leftover units go to strata
    in descending order of fractional remainder, ties broken by lower
    stratum index.
    """
    if n_total < 0:
        raise AllocationError("total sample size must be >= 0")
    if any(f < 0 for f in fractions):
        raise AllocationError("allocation fractions must be non-negative")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise AllocationError(f"fractions sum to {sum(fractions)!r}, expected 1")
    floors = [math.floor(f * n_total) for f in fractions]
    remainders = [f * n_total - fl for f, fl in zip(fractions, floors)]
    leftover = n_total - sum(floors)
    if not 0 <= leftover <= len(fractions):
        raise AllocationError("inconsistent rounding state; check fractions")
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in range(leftover):
        floors[order[i]] += 1
    return floors


@dataclass(frozen=True)
class AllocationPlan:
    """Result of the size/allocation computation for a two-phase study.

    ``counts`` are final per-stratum sample sizes including the pilot;
    ``second_phase_counts[j] = counts[j] - pilot_per_stratum``.
    Lists are aligned with :data:`~strataeval.corpus.STRATUM_CLASSES`.
    """

    n_total: int
    fractions: tuple[float, ...]
    counts: tuple[int, ...]
    pilot_per_stratum: int
    second_phase_counts: tuple[int, ...]

    def __post_init__(self):
        if sum(self.counts) != self.n_total:
            raise AllocationError("counts do not sum to n_total")
        if any(s < 0 for s in self.second_phase_counts):
            raise AllocationError("second-phase count below zero; pilot larger than a stratum count")

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "fractions": list(self.fractions),
            "counts": list(self.counts),
            "pilot_per_stratum": self.pilot_per_stratum,
            "second_phase_counts": list(self.second_phase_counts),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AllocationPlan":
        return cls(
            n_total=d["n_total"],
            fractions=tuple(d["fractions"]),
            counts=tuple(d["counts"]),
            pilot_per_stratum=d["pilot_per_stratum"],
            second_phase_counts=tuple(d["second_phase_counts"]),
        )


@dataclass(frozen=True)
class SampleDraw:
    """Indices drawn in one phase, per stratum, sorted ascending."""

    phase: str  # "pilot" | "main"
    items: dict[PosClass, tuple[int, ...]]
    seed: int

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.items.values())

    def sizes(self) -> dict[PosClass, int]:
        return {cls: len(self.items[cls]) for cls in STRATUM_CLASSES}

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "seed": self.seed,
            "items": {cls.value: list(self.items[cls]) for cls in STRATUM_CLASSES},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SampleDraw":
        return cls(
            phase=d["phase"],
            seed=d["seed"],
            items={PosClass(k): tuple(v) for k, v in d["items"].items()},
        )


def pilot_draw(corpus: "Corpus", m: int, seed: int) -> SampleDraw:
    """Draw ``m`` tokens per stratum; one generator threaded across strata."""
    if m < 0:
        raise UndersizedStratumError("pilot size must be >= 0")
    for cls in STRATUM_CLASSES:
        if m > len(corpus.strata[cls]):
            raise UndersizedStratumError(
                f"pilot of {m} exceeds the {cls.display} stratum "
                f"(size {len(corpus.strata[cls])})"
            )
    state = RandomState(seed & MASK64)
    items: dict[PosClass, tuple[int, ...]] = {}
    for cls in STRATUM_CLASSES:
        drawn, state = sample_without_replacement(corpus.strata[cls], m, state)
        items[cls] = tuple(drawn)
    return SampleDraw(phase="pilot", items=items, seed=seed & MASK64)


def main_draw(corpus: "Corpus", plan: AllocationPlan, pilot: SampleDraw, seed: int) -> SampleDraw:
    """Draw the second-phase counts, excluding pilot items (disjoint by construction)."""
    state = RandomState(seed & MASK64)
    items: dict[PosClass, tuple[int, ...]] = {}
    for cls, count in zip(STRATUM_CLASSES, plan.second_phase_counts):
        taken = set(pilot.items.get(cls, ()))
        remaining = [i for i in corpus.strata[cls] if i not in taken]
        if count > len(remaining):
            raise DrawError(
                f"second phase needs {count} items from the {cls.display} stratum "
                f"but only {len(remaining)} remain outside the pilot"
            )
        drawn, state = sample_without_replacement(remaining, count, state)
        items[cls] = tuple(drawn)
    return SampleDraw(phase="main", items=items, seed=seed & MASK64)


def target_se_for_margin(margin: float, confidence: float) -> float:
    """Convert a margin of error at a confidence level into a target SE."""
    from .estimation import normal_quantile

    if margin <= 0:
        raise ValueError("margin must be positive")
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0, 1)")
    return margin / normal_quantile((1 + confidence) / 2)
