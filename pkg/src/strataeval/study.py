"""Two-phase evaluation study: an explicit state machine with a judgment
ledger and an append-only audit log.

Phases move strictly forward::

    Created -> PilotDrawn -> PilotJudged -> Allocated -> MainDrawn
            -> Complete -> Reported

The pilot judgments provide per-stratum standard deviations; those drive
the total sample size and its optimal allocation, with pilot items
counting toward the final per-stratum totals.  Every mutation is recorded
in the audit log, and replaying the log against the same corpus rebuilds
the exact final state (draws are pure functions of the seed).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Literal

from .corpus import STRATUM_CLASSES, Corpus, PosClass
from .errors import (
    AllocationError,
    CorpusDriftError,
    JudgmentError,
    PhaseError,
    UndersizedStratumError,
    UnknownItemError,
    VersionError,
)
from .estimation import WeightMode, bernoulli_sd
from .sampling import (
    MASK64,
    AllocationPlan,
    SampleDraw,
    StratumSpec,
    allocate_counts,
    derive_seed,
    main_draw,
    neyman_fractions,
    pilot_draw,
    required_sample_size,
    target_se_for_margin,
)

STUDY_FILE_VERSION = 1


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


class StudyPhase(str, Enum):
    CREATED = "Created"
    PILOT_DRAWN = "PilotDrawn"
    PILOT_JUDGED = "PilotJudged"
    ALLOCATED = "Allocated"
    MAIN_DRAWN = "MainDrawn"
    COMPLETE = "Complete"
    REPORTED = "Reported"


PHASE_ORDER = tuple(StudyPhase)


class Verdict(str, Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    NO_OUTPUT = "no_output"


@dataclass(frozen=True)
class StudyConfig:
    """Knobs of one evaluation study.

    Either ``target_se`` or a ``margin`` (of error, converted at
    ``confidence_level``) may be given, not both; with neither, the
    target SE defaults to 0.01.
    """

    seed: int
    pilot_per_stratum: int = 40
    target_se: float | None = None
    margin: float | None = None
    confidence_level: float = 0.95
    f_beta: float = 1.0
    context_radius: int = 5
    weight_mode: WeightMode = WeightMode.POPULATION
    sigma_source: Literal["recall", "precision"] = "recall"
    sd_corrected: bool = False
    use_fpc: bool = True
    n_override: int | None = None

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 bits")
        if self.pilot_per_stratum < 2:
            raise ValueError("pilot size must be >= 2 per stratum")
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError("confidence level must be in (0, 1)")
        if self.f_beta <= 0:
            raise ValueError("f_beta must be positive")
        if self.context_radius < 0:
            raise ValueError("context radius must be >= 0")
        if self.target_se is not None and self.margin is not None:
            raise ValueError("give either target_se or margin, not both")
        if self.target_se is not None and self.target_se <= 0:
            raise ValueError("target_se must be positive")
        if self.margin is not None and self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.sigma_source not in ("recall", "precision"):
            raise ValueError("sigma_source must be 'recall' or 'precision'")

    def resolved_target_se(self) -> float:
        if self.target_se is not None:
            return self.target_se
        if self.margin is not None:
            return target_se_for_margin(self.margin, self.confidence_level)
        return 0.01

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "pilot_per_stratum": self.pilot_per_stratum,
            "target_se": self.target_se,
            "margin": self.margin,
            "confidence_level": self.confidence_level,
            "f_beta": self.f_beta,
            "context_radius": self.context_radius,
            "weight_mode": self.weight_mode.value,
            "sigma_source": self.sigma_source,
            "sd_corrected": self.sd_corrected,
            "use_fpc": self.use_fpc,
            "n_override": self.n_override,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        d = dict(d)
        d["weight_mode"] = WeightMode(d.get("weight_mode", "population"))
        return cls(**d)


@dataclass(frozen=True)
class Judgment:
    item_index: int
    verdict: Verdict
    judge_id: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "judge_id": self.judge_id,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class AuditEvent:
    ts: str
    action: str  # "create" | "advance" | "judge"
    details: dict

    def to_dict(self) -> dict:
        return {"ts": self.ts, "action": self.action, "details": self.details}


@dataclass
class StudyState:
    """Mutable study; all mutations go through the methods below."""

    corpus: Corpus
    config: StudyConfig
    corpus_digest: str
    phase: StudyPhase = StudyPhase.CREATED
    pilot: SampleDraw | None = None
    pilot_sigmas: dict[PosClass, float] | None = None
    plan: AllocationPlan | None = None
    main: SampleDraw | None = None
    judgments: dict[int, Judgment] = field(default_factory=dict)
    audit_log: list[AuditEvent] = field(default_factory=list)
    _drawn: set[int] = field(default_factory=set, repr=False)

    # -- queries ------------------------------------------------------------

    def drawn_by_class(self, cls: PosClass) -> tuple[int, ...]:
        parts: list[int] = []
        if self.pilot is not None:
            parts.extend(self.pilot.items[cls])
        if self.main is not None:
            parts.extend(self.main.items[cls])
        return tuple(sorted(parts))

    def remaining_by_class(self) -> dict[PosClass, int]:
        """Unjudged counts among all drawn items, per stratum."""
        out = {}
        for cls in STRATUM_CLASSES:
            out[cls] = sum(1 for i in self.drawn_by_class(cls) if i not in self.judgments)
        return out

    def next_unjudged(self, stratum: PosClass | None = None) -> int | None:
        """Lowest-index unjudged drawn item, optionally within one stratum."""
        classes = (stratum,) if stratum is not None else STRATUM_CLASSES
        best: int | None = None
        for cls in classes:
            for i in self.drawn_by_class(cls):
                if i not in self.judgments:
                    if best is None or i < best:
                        best = i
                    break
        return best

    def is_drawn(self, index: int) -> bool:
        return index in self._drawn

    # -- mutations ------------------------------------------------------------

    def advance_phase(self, ts: str | None = None) -> "StudyState":
        """Move to the next phase, enforcing that phase's preconditions."""
        ts = ts or now_iso()
        if self.phase is StudyPhase.CREATED:
            draw = pilot_draw(self.corpus, self.config.pilot_per_stratum, self.config.seed)
            self.pilot = draw
            self._drawn.update(i for ix in draw.items.values() for i in ix)
            self.phase = StudyPhase.PILOT_DRAWN
        elif self.phase is StudyPhase.PILOT_DRAWN:
            self._require_all_judged()
            self.phase = StudyPhase.PILOT_JUDGED
        elif self.phase is StudyPhase.PILOT_JUDGED:
            self.pilot_sigmas = self._sigmas_from_pilot()
            self.plan = compute_allocation(
                [
                    StratumSpec(cls, len(self.corpus.strata[cls]), self.pilot_sigmas[cls])
                    for cls in STRATUM_CLASSES
                ],
                target_se=self.config.resolved_target_se(),
                pilot_per_stratum=self.config.pilot_per_stratum,
                n_override=self.config.n_override,
            )
            self.phase = StudyPhase.ALLOCATED
        elif self.phase is StudyPhase.ALLOCATED:
            draw = main_draw(
                self.corpus, self.plan, self.pilot, derive_seed(self.config.seed, 1)
            )
            self.main = draw
            self._drawn.update(i for ix in draw.items.values() for i in ix)
            self.phase = StudyPhase.MAIN_DRAWN
        elif self.phase is StudyPhase.MAIN_DRAWN:
            self._require_all_judged()
            self.phase = StudyPhase.COMPLETE
        elif self.phase is StudyPhase.COMPLETE:
            self._require_all_judged()
            self.phase = StudyPhase.REPORTED
        else:
            raise PhaseError("study is already Reported; no further phase exists")
        self.audit_log.append(AuditEvent(ts, "advance", {"to": self.phase.value}))
        return self

    def record_judgment(
        self,
        index: int,
        verdict: Verdict | str,
        judge_id: str,
        ts: str | None = None,
    ) -> "StudyState":
        """Write one verdict (last write wins); always appended to the audit log."""
        verdict = Verdict(verdict)
        if self.phase is StudyPhase.CREATED:
            raise PhaseError("nothing has been drawn yet; advance the study first")
        if self.phase is StudyPhase.REPORTED:
            raise PhaseError("study is Reported; judgments are frozen")
        if not judge_id:
            raise JudgmentError("judge_id is required")
        if not self.is_drawn(index):
            raise UnknownItemError(f"item {index} is not part of any draw")
        record = self.corpus.records[index]
        if record.system_lemma is None and verdict is not Verdict.NO_OUTPUT:
            raise JudgmentError(
                f"item {index} has no system lemma; the only valid verdict is no_output"
            )
        if record.system_lemma is not None and verdict is Verdict.NO_OUTPUT:
            raise JudgmentError(
                f"item {index} has a system lemma; no_output is not a valid verdict"
            )
        ts = ts or now_iso()
        self.judgments[index] = Judgment(index, verdict, judge_id, ts)
        self.audit_log.append(
            AuditEvent(ts, "judge", {"index": index, "verdict": verdict.value, "judge_id": judge_id})
        )
        return self

    # -- internals ------------------------------------------------------------

    def _require_all_judged(self) -> None:
        remaining = self.remaining_by_class()
        if any(remaining.values()):
            detail = "; ".join(
                f"{count} remaining in {cls.display}" for cls, count in remaining.items() if count
            )
            raise PhaseError(
                f"cannot advance: {detail}",
                {cls.value: count for cls, count in remaining.items()},
            )

    def _sigmas_from_pilot(self) -> dict[PosClass, float]:
        sigmas: dict[PosClass, float] = {}
        for cls in STRATUM_CLASSES:
            indices = self.pilot.items[cls]
            judged = len(indices)
            produced = sum(
                1 for i in indices if self.corpus.records[i].system_lemma is not None
            )
            correct = sum(1 for i in indices if self.judgments[i].verdict == "correct")
            if self.config.sigma_source == "precision":
                if produced == 0:
                    raise PhaseError(
                        f"sigma_source=precision but the {cls.display} pilot produced no output;"
                        " switch to recall-based sigmas"
                    )
                p, m = correct / produced, produced
            else:
                p, m = correct / judged, judged
            sigmas[cls] = bernoulli_sd(p, m, corrected=self.config.sd_corrected)
        return sigmas

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": STUDY_FILE_VERSION,
            "config": self.config.to_dict(),
            "corpus_digest": self.corpus_digest,
            "phase": self.phase.value,
            "draws": {
                "pilot": self.pilot.to_dict() if self.pilot else None,
                "sigmas": (
                    {cls.value: self.pilot_sigmas[cls] for cls in STRATUM_CLASSES}
                    if self.pilot_sigmas
                    else None
                ),
                "plan": self.plan.to_dict() if self.plan else None,
                "main": self.main.to_dict() if self.main else None,
            },
            "judgments": {
                str(i): self.judgments[i].to_dict() for i in sorted(self.judgments)
            },
            "audit_log": [e.to_dict() for e in self.audit_log],
        }

    @classmethod
    def from_dict(cls, d: dict, corpus: Corpus) -> "StudyState":
        version = d.get("version")
        if version != STUDY_FILE_VERSION:
            raise VersionError(
                f"study file version {version!r} not supported (expected {STUDY_FILE_VERSION})"
            )
        draws = d.get("draws", {})
        state = cls(
            corpus=corpus,
            config=StudyConfig.from_dict(d["config"]),
            corpus_digest=d["corpus_digest"],
            phase=StudyPhase(d["phase"]),
            pilot=SampleDraw.from_dict(draws["pilot"]) if draws.get("pilot") else None,
            pilot_sigmas=(
                {PosClass(k): v for k, v in draws["sigmas"].items()}
                if draws.get("sigmas")
                else None
            ),
            plan=AllocationPlan.from_dict(draws["plan"]) if draws.get("plan") else None,
            main=SampleDraw.from_dict(draws["main"]) if draws.get("main") else None,
            judgments={
                int(i): Judgment(int(i), Verdict(j["verdict"]), j["judge_id"], j["timestamp"])
                for i, j in d.get("judgments", {}).items()
            },
            audit_log=[
                AuditEvent(e["ts"], e["action"], e["details"]) for e in d.get("audit_log", [])
            ],
        )
        for draw in (state.pilot, state.main):
            if draw is not None:
                state._drawn.update(i for ix in draw.items.values() for i in ix)
        return state


def compute_allocation(
    strata: list[StratumSpec],
    target_se: float,
    pilot_per_stratum: int,
    n_override: int | None = None,
) -> AllocationPlan:
    """Total size and integer per-stratum counts for the second phase.

    The total is ``max(ceil(n_required), pilot total)`` (the pilot is never
    wasted), or a caller-supplied override that must be at least that.
    Counts are largest-remainder rounded, then adjusted so each stratum
    keeps at least its pilot and never exceeds its population.
    """
    m = pilot_per_stratum
    size = required_sample_size(strata, target_se)
    n_total = max(size.count, m * len(strata))
    if n_override is not None:
        if n_override < n_total:
            raise AllocationError(
                f"requested total {n_override} is below the required minimum {n_total}"
            )
        n_total = n_override
    capacity = sum(spec.size for spec in strata)
    if n_total > capacity:
        raise AllocationError(
            f"total sample {n_total} exceeds the population of {capacity}"
        )
    try:
        fractions = neyman_fractions(strata)
    except AllocationError:
        # all sigmas zero (e.g. a perfect pilot): fall back to proportional
        fractions = [spec.size / capacity for spec in strata]
    counts = allocate_counts(n_total, fractions)
    counts = _clamp_counts(
        counts,
        lows=[m] * len(strata),
        highs=[spec.size for spec in strata],
        fractions=fractions,
        n_total=n_total,
    )
    return AllocationPlan(
        n_total=n_total,
        fractions=tuple(fractions),
        counts=tuple(counts),
        pilot_per_stratum=m,
        second_phase_counts=tuple(c - m for c in counts),
    )


def _clamp_counts(
    counts: list[int],
    lows: list[int],
    highs: list[int],
    fractions: list[float],
    n_total: int,
) -> list[int]:
    """Force lows <= counts <= highs while keeping the exact total."""
    if sum(lows) > n_total or sum(highs) < n_total:
        raise AllocationError(
            f"no allocation of {n_total} fits the per-stratum bounds {list(zip(lows, highs))}"
        )
    counts = [min(max(c, lo), hi) for c, lo, hi in zip(counts, lows, highs)]
    diff = n_total - sum(counts)
    while diff != 0:
        if diff > 0:
            # grow the stratum furthest below its ideal share
            candidates = [j for j in range(len(counts)) if counts[j] < highs[j]]
            j = max(candidates, key=lambda j: (fractions[j] * n_total - counts[j], -j))
            counts[j] += 1
            diff -= 1
        else:
            candidates = [j for j in range(len(counts)) if counts[j] > lows[j]]
            j = max(candidates, key=lambda j: (counts[j] - fractions[j] * n_total, -j))
            counts[j] -= 1
            diff += 1
    return counts


def create_study(corpus: Corpus, config: StudyConfig, ts: str | None = None) -> StudyState:
    """Start a study in the Created phase, recording the corpus digest."""
    for cls in STRATUM_CLASSES:
        size = len(corpus.strata[cls])
        if size == 0:
            raise UndersizedStratumError(f"corpus has no {cls.display} tokens; cannot stratify")
        if config.pilot_per_stratum > size:
            raise UndersizedStratumError(
                f"pilot of {config.pilot_per_stratum} exceeds the {cls.display} stratum (size {size})"
            )
    state = StudyState(corpus=corpus, config=config, corpus_digest=corpus.digest)
    state.audit_log.append(
        AuditEvent(ts or now_iso(), "create", {"config": config.to_dict()})
    )
    return state


def save_study(study: StudyState, path) -> None:
    """Write the study file atomically (temp file, then rename)."""
    data = json.dumps(study.to_dict(), ensure_ascii=False, indent=2) + "\n"
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_study(path, corpus: Corpus) -> StudyState:
    """Load a study file and bind it to its corpus, verifying the digest."""
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("version") != STUDY_FILE_VERSION:
        raise VersionError(
            f"study file version {d.get('version')!r} not supported (expected {STUDY_FILE_VERSION})"
        )
    if d["corpus_digest"] != corpus.digest:
        raise CorpusDriftError(
            "corpus digest mismatch: the corpus file changed since the study was created",
            {"stored": d["corpus_digest"], "actual": corpus.digest},
        )
    return StudyState.from_dict(d, corpus)


def replay_audit_log(corpus: Corpus, audit_log: list[AuditEvent]) -> StudyState:
    """Rebuild a study by replaying its audit log against the same corpus."""
    if not audit_log or audit_log[0].action != "create":
        raise VersionError("audit log must start with a create event")
    config = StudyConfig.from_dict(audit_log[0].details["config"])
    study = create_study(corpus, config, ts=audit_log[0].ts)
    for event in audit_log[1:]:
        if event.action == "advance":
            study.advance_phase(ts=event.ts)
        elif event.action == "judge":
            study.record_judgment(
                event.details["index"],
                Verdict(event.details["verdict"]),
                event.details["judge_id"],
                ts=event.ts,
            )
        else:
            raise VersionError(f"unknown audit action {event.action!r}")
    return study
