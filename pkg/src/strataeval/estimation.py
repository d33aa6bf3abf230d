"""Proportion estimation for stratified samples: pooled estimates, standard
errors, confidence intervals, and the precision/recall/F report.

Definitions used throughout:

* precision of a stratum = correct / produced, where *produced* counts the
  sampled tokens for which the annotator emitted any output.  If nothing
  was produced the precision is undefined (``None``), never zero.
* recall of a stratum = correct / judged, i.e. over all sampled tokens.
* the pooled proportion is a weighted mean sum(w_i * p_i) / sum(w_i).
  "Sample" weighting uses each proportion's own denominator (produced
  counts for precision, judged counts for recall); "population" weighting
  uses the stratum population sizes N_j, which is the default for
  reporting because optimal allocation deliberately over-samples
  high-variance strata.
* intervals are normal-approximation: p_hat +/- z * SE, clipped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .corpus import STRATUM_CLASSES, PosClass
from .errors import IncompleteStudyError

if TYPE_CHECKING:
    from .study import StudyState


# --- normal quantile -------------------------------------------------------

# Acklam's rational approximation of the inverse normal CDF, refined with
# one Halley step through math.erfc; good to ~1e-15 over (0, 1).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Standard normal quantile (inverse CDF) for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError("normal quantile requires 0 < p < 1")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # Halley refinement
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def z_for_level(level: float) -> float:
    """Two-sided critical value at a confidence level, e.g. 0.95 -> 1.96."""
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must be in (0, 1)")
    return normal_quantile((1.0 + level) / 2.0)


# --- elementary pieces -----------------------------------------------------

def stratum_proportions(correct: int, produced: int, judged: int) -> tuple[float | None, float]:
    """(precision, recall) for one stratum's judged counts.

    Precision is ``None`` when nothing was produced -- a distinct signal,
    not zero.
    """
    if not 0 <= correct <= produced <= judged:
        raise ValueError(
            f"need 0 <= correct <= produced <= judged, got ({correct}, {produced}, {judged})"
        )
    if judged < 1:
        raise ValueError("recall needs at least one judged item")
    precision = correct / produced if produced > 0 else None
    recall = correct / judged
    return precision, recall


def bernoulli_sd(p: float, m: int | None = None, corrected: bool = False) -> float:
    """Standard deviation sqrt(p(1-p)) of a proportion.

    With ``corrected`` the sample-SD divisor is used instead, i.e. the
    value is scaled by sqrt(m / (m-1)); ``m`` must then be >= 2.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("proportion must be within [0, 1]")
    sd = math.sqrt(p * (1.0 - p))
    if corrected:
        if m is None or m < 2:
            raise ValueError("corrected SD needs a sample count m >= 2")
        sd *= math.sqrt(m / (m - 1))
    return sd


def pooled_proportion(pairs: Iterable[tuple[float, float]]) -> float:
    """Weighted mean of proportions: sum(w_i * p_i) / sum(w_i)."""
    total_w = 0.0
    total_wp = 0.0
    for w, p in pairs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"proportion {p} outside [0, 1]")
        if w < 0:
            raise ValueError("weights must be non-negative")
        total_w += w
        total_wp += w * p
    if total_w <= 0:
        raise ValueError("total weight must be positive")
    return total_wp / total_w


def stratified_se(
    weights: Sequence[float],
    proportions: Sequence[float],
    sample_sizes: Sequence[int],
    population_sizes: Sequence[int] | None = None,
) -> float:
    """SE of the stratified pooled proportion.

    ``weights`` are the stratum weight fractions (must sum to 1); each
    variance term is ``w_j^2 * p_j(1-p_j) / n_j``, shrunk by the finite
    population correction ``1 - n_j/N_j`` when population sizes are given.
    """
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(f"weights sum to {sum(weights)!r}, expected 1")
    variance = 0.0
    for j, (w, p, n) in enumerate(zip(weights, proportions, sample_sizes)):
        if n < 1:
            raise ValueError("every stratum needs at least one sampled item")
        term = w * w * p * (1.0 - p) / n
        if population_sizes is not None:
            term *= max(0.0, 1.0 - n / population_sizes[j])
        variance += term
    return math.sqrt(variance)


def confidence_interval(p_hat: float, se: float, level: float) -> tuple[float, float]:
    """Normal-approximation interval, clipped to [0, 1]."""
    if se < 0:
        raise ValueError("standard error must be >= 0")
    z = z_for_level(level)
    return max(0.0, p_hat - z * se), min(1.0, p_hat + z * se)


def f_measure(precision: float, recall: float, beta: float = 1.0) -> float:
    """Weighted harmonic mean (1+b^2)PR / (b^2 P + R); 0 when P + R == 0."""
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise ValueError("precision and recall must be within [0, 1]")
    if beta <= 0:
        raise ValueError("beta must be positive")
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


# --- report ----------------------------------------------------------------

class WeightMode(str, Enum):
    SAMPLE = "sample"
    POPULATION = "population"


@dataclass(frozen=True)
class Estimate:
    """A pooled point estimate with its SE and confidence interval."""

    point: float
    se: float
    ci_lo: float
    ci_hi: float

    def to_dict(self) -> dict:
        return {"point": self.point, "se": self.se, "ci": [self.ci_lo, self.ci_hi]}


@dataclass(frozen=True)
class StratumStats:
    pos: PosClass
    population_size: int
    sample_size: int
    judged: int
    produced: int
    correct: int
    p_precision: float | None
    p_recall: float
    sd: float | None

    def to_dict(self) -> dict:
        return {
            "class": self.pos.value,
            "population_size": self.population_size,
            "sample_size": self.sample_size,
            "judged": self.judged,
            "produced": self.produced,
            "correct": self.correct,
            "p_precision": self.p_precision,
            "p_recall": self.p_recall,
            "sd": self.sd,
        }


@dataclass(frozen=True)
class ModeEstimates:
    precision: Estimate | None
    recall: Estimate
    f_measure: float | None

    def to_dict(self) -> dict:
        return {
            "precision": self.precision.to_dict() if self.precision else None,
            "recall": self.recall.to_dict(),
            "f_measure": self.f_measure,
        }


@dataclass(frozen=True)
class EvaluationReport:
    confidence_level: float
    target_se: float
    f_beta: float
    weight_mode: WeightMode
    per_stratum: tuple[StratumStats, ...]
    modes: dict[WeightMode, ModeEstimates]

    @property
    def primary(self) -> ModeEstimates:
        return self.modes[self.weight_mode]

    @property
    def precision(self) -> Estimate | None:
        return self.primary.precision

    @property
    def recall(self) -> Estimate:
        return self.primary.recall

    @property
    def f(self) -> float | None:
        return self.primary.f_measure

    def to_dict(self) -> dict:
        primary = self.primary
        return {
            "confidence_level": self.confidence_level,
            "target_se": self.target_se,
            "f_beta": self.f_beta,
            "weight_mode": self.weight_mode.value,
            "precision": primary.precision.to_dict() if primary.precision else None,
            "recall": primary.recall.to_dict(),
            "f_measure": primary.f_measure,
            "modes": {mode.value: est.to_dict() for mode, est in sorted(self.modes.items(), key=lambda kv: kv[0].value)},
            "per_stratum": [s.to_dict() for s in self.per_stratum],
        }

    def to_text(self) -> str:
        lines = []
        pct = int(round(self.confidence_level * 100))
        for mode in (self.weight_mode,) + tuple(m for m in WeightMode if m != self.weight_mode):
            est = self.modes[mode]
            tag = " (primary)" if mode == self.weight_mode else ""
            lines.append(f"Weight mode: {mode.value}{tag}")
            if est.precision is not None:
                lines.append(
                    f"  Precision  {est.precision.point:.4f}   {pct}% CI"
                    f" [{est.precision.ci_lo:.4f}, {est.precision.ci_hi:.4f}]"
                )
            else:
                lines.append("  Precision  undefined (no produced output)")
            lines.append(
                f"  Recall     {est.recall.point:.4f}   {pct}% CI"
                f" [{est.recall.ci_lo:.4f}, {est.recall.ci_hi:.4f}]"
            )
            if est.f_measure is not None:
                lines.append(f"  F(beta={self.f_beta:g})  {est.f_measure:.4f}")
            else:
                lines.append(f"  F(beta={self.f_beta:g})  undefined")
        lines.append("Per stratum:")
        lines.append("  class       N        n     judged  produced  correct  p_P      p_R      sd")
        for s in self.per_stratum:
            p_p = f"{s.p_precision:.4f}" if s.p_precision is not None else "  --  "
            sd = f"{s.sd:.4f}" if s.sd is not None else "  --  "
            lines.append(
                f"  {s.pos.display:<10}{s.population_size:>8}{s.sample_size:>9}"
                f"{s.judged:>9}{s.produced:>10}{s.correct:>9}  {p_p}   {s.p_recall:.4f}   {sd}"
            )
        return "\n".join(lines)


def build_report(study: "StudyState") -> EvaluationReport:
    """Per-stratum stats plus pooled P/R/F in both weight modes.

    Requires every drawn item to be judged; raises
    :class:`IncompleteStudyError` listing per-stratum remaining counts
    otherwise.
    """
    corpus = study.corpus
    config = study.config
    remaining = study.remaining_by_class()
    if any(remaining.values()):
        detail = ", ".join(
            f"{cls.display}: {count}" for cls, count in remaining.items() if count
        )
        raise IncompleteStudyError(
            f"cannot build report; unjudged items remain ({detail})",
            {cls.value: count for cls, count in remaining.items()},
        )

    sigmas = study.pilot_sigmas or {}
    stats: list[StratumStats] = []
    for cls in STRATUM_CLASSES:
        indices = study.drawn_by_class(cls)
        if not indices:
            continue
        judged = len(indices)
        produced = sum(1 for i in indices if corpus.records[i].system_lemma is not None)
        correct = sum(1 for i in indices if study.judgments[i].verdict == "correct")
        p_precision, p_recall = stratum_proportions(correct, produced, judged)
        stats.append(
            StratumStats(
                pos=cls,
                population_size=len(corpus.strata[cls]),
                sample_size=judged,
                judged=judged,
                produced=produced,
                correct=correct,
                p_precision=p_precision,
                p_recall=p_recall,
                sd=sigmas.get(cls),
            )
        )

    level = config.confidence_level
    fpc = config.use_fpc
    modes = {
        mode: _mode_estimates(stats, mode, level, config.f_beta, fpc)
        for mode in WeightMode
    }
    return EvaluationReport(
        confidence_level=level,
        target_se=config.resolved_target_se(),
        f_beta=config.f_beta,
        weight_mode=config.weight_mode,
        per_stratum=tuple(stats),
        modes=modes,
    )


def _pooled_estimate(
    rows: list[tuple[float, float, int, int]], level: float, fpc: bool
) -> Estimate:
    """rows: (raw weight, proportion, variance denominator n, population N)."""
    total_w = sum(w for w, _, _, _ in rows)
    weights = [w / total_w for w, _, _, _ in rows]
    point = pooled_proportion((w, p) for w, p, _, _ in rows)
    se = stratified_se(
        weights,
        [p for _, p, _, _ in rows],
        [n for _, _, n, _ in rows],
        [cap for _, _, _, cap in rows] if fpc else None,
    )
    lo, hi = confidence_interval(point, se, level)
    return Estimate(point=point, se=se, ci_lo=lo, ci_hi=hi)


def _mode_estimates(
    stats: list[StratumStats], mode: WeightMode, level: float, beta: float, fpc: bool
) -> ModeEstimates:
    def weight(s: StratumStats, denominator: int) -> float:
        if mode is WeightMode.POPULATION:
            return float(s.population_size)
        return float(denominator)

    recall_rows = [
        (weight(s, s.judged), s.p_recall, s.judged, s.population_size) for s in stats
    ]
    recall = _pooled_estimate(recall_rows, level, fpc)

    produced_stats = [s for s in stats if s.produced > 0]
    precision: Estimate | None = None
    if produced_stats:
        precision_rows = [
            (weight(s, s.produced), s.p_precision, s.produced, s.population_size)
            for s in produced_stats
        ]
        precision = _pooled_estimate(precision_rows, level, fpc)

    f_value = (
        f_measure(precision.point, recall.point, beta) if precision is not None else None
    )
    return ModeEstimates(precision=precision, recall=recall, f_measure=f_value)
