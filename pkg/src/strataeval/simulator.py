"""Synthetic corpora with known ground truth, and Monte Carlo validation
of the full pipeline (allocation, estimation, confidence interval coverage).

Each replication runs an independent end-to-end study on a fresh corpus:
pilot draw, oracle judgments, allocation, main draw, oracle judgments,
report.  Coverage is measured against the realized finite-population
proportion of the generated corpus (the corpus itself is the inference
target, not the generative rates).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .corpus import STRATUM_CLASSES, Corpus, PosClass, TokenRecord
from .errors import SimSpecError
from .estimation import WeightMode, build_report
from .sampling import derive_seed
from .study import StudyConfig, StudyState, Verdict, create_study
from .tagsets import DEFAULT_TAG_INVENTORIES


def _per_class(value, name: str) -> dict[PosClass, float]:
    if isinstance(value, (int, float)):
        return {cls: float(value) for cls in STRATUM_CLASSES}
    try:
        return {cls: float(value[cls.value]) for cls in STRATUM_CLASSES}
    except KeyError as exc:
        raise SimSpecError(f"{name} must cover all of noun/adjective/verb: missing {exc}")


@dataclass(frozen=True)
class SimSpec:
    """Generative description of a synthetic corpus and experiment."""

    sizes: dict[PosClass, int]
    correct_rates: dict[PosClass, float]
    no_output_rates: dict[PosClass, float]
    seed: int
    replications: int = 1000
    tag_inventories: dict[PosClass, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_TAG_INVENTORIES)
    )

    def __post_init__(self):
        for cls in STRATUM_CLASSES:
            if self.sizes[cls] < 1:
                raise SimSpecError(f"{cls.value} population size must be >= 1")
            if not 0.0 <= self.correct_rates[cls] <= 1.0:
                raise SimSpecError("correct rates must be within [0, 1]")
            if not 0.0 <= self.no_output_rates[cls] <= 1.0:
                raise SimSpecError("no-output rates must be within [0, 1]")
            if not self.tag_inventories.get(cls):
                raise SimSpecError(f"empty tag inventory for {cls.value}")

    @classmethod
    def from_dict(cls, d: dict) -> "SimSpec":
        try:
            sizes = {c: int(v) for c, v in _per_class(d["sizes"], "sizes").items()}
            spec = cls(
                sizes=sizes,
                correct_rates=_per_class(d["correct_rates"], "correct_rates"),
                no_output_rates=_per_class(d.get("no_output_rates", 0.0), "no_output_rates"),
                seed=int(d["seed"]),
                replications=int(d.get("replications", 1000)),
                tag_inventories=(
                    {PosClass(k): tuple(v) for k, v in d["tag_inventories"].items()}
                    if "tag_inventories" in d
                    else dict(DEFAULT_TAG_INVENTORIES)
                ),
            )
        except KeyError as exc:
            raise SimSpecError(f"simulation spec is missing {exc}")
        return spec


def synth_corpus(spec: SimSpec) -> tuple[Corpus, dict[int, Verdict]]:
    """Generate a corpus plus the oracle mapping index -> true verdict.

    Tags are drawn uniformly from the stratum's inventory; each token is
    a no-output with probability u_j, otherwise correct with probability
    q_j.  Deterministic for a fixed spec (including the seed).
    """
    rng = np.random.default_rng(spec.seed)
    records: list[TokenRecord] = []
    oracle: dict[int, Verdict] = {}
    strata: dict[PosClass, tuple[int, ...]] = {}
    start = 0
    for cls in STRATUM_CLASSES:
        k = spec.sizes[cls]
        inventory = spec.tag_inventories[cls]
        tag_ix = rng.integers(0, len(inventory), size=k)
        no_out = rng.random(k) < spec.no_output_rates[cls]
        correct = rng.random(k) < spec.correct_rates[cls]
        for offset in range(k):
            i = start + offset
            if no_out[offset]:
                lemma, verdict = None, Verdict.NO_OUTPUT
            elif correct[offset]:
                lemma, verdict = f"l{i}", Verdict.CORRECT
            else:
                lemma, verdict = f"x{i}", Verdict.WRONG
            records.append(TokenRecord(i, f"w{i}", inventory[tag_ix[offset]], lemma, None, "sim"))
            oracle[i] = verdict
        strata[cls] = tuple(range(start, start + k))
        start += k
    return Corpus.from_records(records, strata=strata), oracle


def auto_judge(study: StudyState, oracle: dict[int, Verdict], judge_id: str = "oracle") -> StudyState:
    """Judge every drawn, not-yet-judged item according to the oracle."""
    for cls in STRATUM_CLASSES:
        for i in study.drawn_by_class(cls):
            if i not in study.judgments:
                study.record_judgment(i, oracle[i], judge_id)
    return study


class ReplicationRow(NamedTuple):
    replication: int
    seed: int
    n_total: int
    recall_hat: float
    recall_lo: float
    recall_hi: float
    recall_truth: float
    recall_covered: bool
    precision_hat: float | None
    precision_lo: float | None
    precision_hi: float | None
    precision_truth: float | None
    precision_covered: bool | None


@dataclass(frozen=True)
class CoverageResult:
    replications: int
    coverage_recall: float
    coverage_precision: float | None
    mean_n: float
    mean_width: float
    rows: tuple[ReplicationRow, ...]

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "coverage_recall": self.coverage_recall,
            "coverage_precision": self.coverage_precision,
            "mean_n": self.mean_n,
            "mean_width": self.mean_width,
        }


def run_replication(spec: SimSpec, target_se: float, pilot_per_stratum: int, rep: int) -> ReplicationRow:
    """One full study on a fresh synthetic corpus; returns its outcome row."""
    rep_seed = derive_seed(spec.seed, rep)
    corpus, oracle = synth_corpus(replace(spec, seed=rep_seed))
    config = StudyConfig(
        seed=rep_seed,
        pilot_per_stratum=pilot_per_stratum,
        target_se=target_se,
        weight_mode=WeightMode.POPULATION,
    )
    study = create_study(corpus, config)
    study.advance_phase()  # pilot drawn
    auto_judge(study, oracle)
    study.advance_phase()  # pilot judged
    study.advance_phase()  # allocated
    study.advance_phase()  # main drawn
    auto_judge(study, oracle)
    study.advance_phase()  # complete
    study.advance_phase()  # reported
    report = build_report(study)

    pop_n = corpus.population_size
    truth_recall = sum(1 for v in oracle.values() if v is Verdict.CORRECT) / pop_n
    # population-weighted precision truth over strata with any produced output
    w_total = 0.0
    weighted_p = 0.0
    for cls in STRATUM_CLASSES:
        indices = corpus.strata[cls]
        produced = sum(1 for i in indices if oracle[i] is not Verdict.NO_OUTPUT)
        if produced == 0:
            continue
        correct = sum(1 for i in indices if oracle[i] is Verdict.CORRECT)
        w_total += len(indices)
        weighted_p += len(indices) * (correct / produced)
    truth_precision = weighted_p / w_total if w_total else None

    estimates = report.modes[WeightMode.POPULATION]
    recall = estimates.recall
    precision = estimates.precision
    return ReplicationRow(
        replication=rep,
        seed=rep_seed,
        n_total=study.plan.n_total,
        recall_hat=recall.point,
        recall_lo=recall.ci_lo,
        recall_hi=recall.ci_hi,
        recall_truth=truth_recall,
        recall_covered=recall.ci_lo <= truth_recall <= recall.ci_hi,
        precision_hat=precision.point if precision else None,
        precision_lo=precision.ci_lo if precision else None,
        precision_hi=precision.ci_hi if precision else None,
        precision_truth=truth_precision,
        precision_covered=(
            precision.ci_lo <= truth_precision <= precision.ci_hi
            if precision is not None and truth_precision is not None
            else None
        ),
    )


def coverage_experiment(
    spec: SimSpec,
    target_se: float,
    pilot_per_stratum: int = 40,
    progress: Callable[[int, int], None] | None = None,
) -> CoverageResult:
    """Run R full studies; report how often the CIs cover the realized truth."""
    if spec.replications < 100:
        raise SimSpecError("coverage experiments need at least 100 replications")
    if all(spec.no_output_rates[cls] >= 1.0 for cls in STRATUM_CLASSES):
        raise SimSpecError(
            "degenerate spec: no stratum ever produces output, precision is undefined everywhere"
        )
    rows = []
    for rep in range(spec.replications):
        rows.append(run_replication(spec, target_se, pilot_per_stratum, rep))
        if progress is not None:
            progress(rep + 1, spec.replications)

    recall_covered = sum(1 for r in rows if r.recall_covered)
    precision_rows = [r for r in rows if r.precision_covered is not None]
    return CoverageResult(
        replications=len(rows),
        coverage_recall=recall_covered / len(rows),
        coverage_precision=(
            sum(1 for r in precision_rows if r.precision_covered) / len(precision_rows)
            if precision_rows
            else None
        ),
        mean_n=sum(r.n_total for r in rows) / len(rows),
        mean_width=sum(r.recall_hi - r.recall_lo for r in rows) / len(rows),
        rows=tuple(rows),
    )
