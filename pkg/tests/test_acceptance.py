"""Acceptance criteria, one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to get one PASS line
per criterion (a failed assert means FAIL for that line).
"""

import json
import time

import pytest

from strataeval import (
    STRATUM_CLASSES,
    PosClass,
    StratumSpec,
    StudyConfig,
    WeightMode,
    allocate_counts,
    build_report,
    confidence_interval,
    create_study,
    f_measure,
    frequency_table,
    neyman_fractions,
    pooled_proportion,
    required_sample_size,
    replay_audit_log,
    save_study,
    load_study,
)
from strataeval.simulator import SimSpec, auto_judge, coverage_experiment, synth_corpus
from strataeval.study import StudyPhase
from strataeval.tagsets import REFERENCE_TAG_COUNTS

REF_STRATA = [
    StratumSpec(PosClass.NOUN, 80509, 0.243),
    StratumSpec(PosClass.ADJECTIVE, 23159, 0.352),
    StratumSpec(PosClass.VERB, 45393, 0.195),
]


def _ok(criterion: str, detail: str) -> None:
    print(f"{criterion} PASS: {detail}")


def test_A1_optimal_allocation_fractions():
    fractions = neyman_fractions(REF_STRATA)
    expected = (0.534, 0.224, 0.242)
    for got, want in zip(fractions, expected):
        assert abs(got - want) <= 0.002, f"fraction {got} vs {want}"
    _ok("A1", f"fractions {tuple(round(f, 4) for f in fractions)} within +/-0.002 of {expected}")


def test_A2_total_sample_size():
    size = required_sample_size(REF_STRATA, target_se=0.01)
    assert 595 <= size.real <= 604, size
    assert 595 <= 597 <= 604  # the reported total lies in the accepted band
    assert size.count == 600
    _ok("A2", f"n = {size.real:.4f} (ceil {size.count}) within [595, 604], reported 597 inside")


def test_A3_integer_allocation():
    fractions = neyman_fractions(REF_STRATA)
    counts = allocate_counts(1373, fractions)
    assert sum(counts) == 1373
    for got, want in zip(counts, (732, 308, 333)):
        assert abs(got - want) <= 3, counts
    second = [c - 40 for c in counts]
    for got, want in zip(second, (692, 268, 293)):
        assert abs(got - want) <= 3, second
    _ok("A3", f"counts {counts} (sum 1373) and second phase {second} within +/-3")


def test_A4_f_measure():
    value = f_measure(0.97, 0.93, 1.0)
    assert abs(value - 0.94958) <= 5e-4
    assert round(value, 2) == 0.95
    _ok("A4", f"F(0.97, 0.93) = {value:.5f}, rounds to 0.95")


def test_A5_confidence_interval():
    lo, hi = confidence_interval(0.97, 0.0102, 0.95)
    assert abs(lo - 0.950) <= 0.001, (lo, hi)
    assert abs(hi - 0.990) <= 0.001, (lo, hi)
    _ok("A5", f"CI(0.97, se 0.0102, 95%) = ({lo:.4f}, {hi:.4f})")


def test_A6_reference_frequency_tables(table_corpus):
    started = time.time()
    for cls in STRATUM_CLASSES:
        table = frequency_table(table_corpus, cls)
        assert table.entries == REFERENCE_TAG_COUNTS[cls], cls
    noun = frequency_table(table_corpus, PosClass.NOUN).entries
    adjective = frequency_table(table_corpus, PosClass.ADJECTIVE).entries
    verb = frequency_table(table_corpus, PosClass.VERB).entries
    assert noun["N-msi"] == 18667
    assert adjective["Amsi"] == 3256
    assert verb["V---f-r3s"] == 15582
    elapsed = time.time() - started
    assert elapsed < 5.0
    _ok("A6", f"all {len(noun) + len(adjective) + len(verb)} rows match exactly ({elapsed:.2f}s)")


def _pipeline_report_bytes(seed: int) -> bytes:
    spec = SimSpec(
        sizes={PosClass.NOUN: 600, PosClass.ADJECTIVE: 400, PosClass.VERB: 500},
        correct_rates={cls: 0.9 for cls in STRATUM_CLASSES},
        no_output_rates={cls: 0.05 for cls in STRATUM_CLASSES},
        seed=seed,
        replications=100,
    )
    corpus, oracle = synth_corpus(spec)
    study = create_study(corpus, StudyConfig(seed=seed, pilot_per_stratum=40, target_se=0.03))
    study.advance_phase()
    auto_judge(study, oracle)
    for _ in range(5):
        if study.phase in (StudyPhase.MAIN_DRAWN,):
            auto_judge(study, oracle)
        study.advance_phase()
    assert study.phase is StudyPhase.REPORTED
    report = build_report(study)
    return json.dumps(report.to_dict(), sort_keys=True).encode()


def test_A7_pipeline_determinism():
    started = time.time()
    first = _pipeline_report_bytes(777)
    second = _pipeline_report_bytes(777)
    elapsed = time.time() - started
    assert first == second
    assert elapsed < 10.0
    _ok("A7", f"two runs, byte-identical report JSON ({len(first)} bytes, {elapsed:.2f}s)")


def test_A8_confidence_interval_coverage():
    started = time.time()
    spec = SimSpec(
        sizes={PosClass.NOUN: 8000, PosClass.ADJECTIVE: 2300, PosClass.VERB: 4500},
        correct_rates={cls: 0.9 for cls in STRATUM_CLASSES},
        no_output_rates={cls: 0.04 for cls in STRATUM_CLASSES},
        seed=20260809,
        replications=2000,
    )
    result = coverage_experiment(spec, target_se=0.01)
    elapsed = time.time() - started
    assert elapsed < 300.0
    assert 0.93 <= result.coverage_recall <= 0.97, result.to_dict()
    # companion bound from the report-level Monte Carlo example (>= 93%)
    assert 0.93 <= result.coverage_precision <= 0.98, result.to_dict()
    _ok(
        "A8",
        f"recall coverage {result.coverage_recall:.4f} in [0.93, 0.97] "
        f"(precision {result.coverage_precision:.4f}, mean n {result.mean_n:.0f}, {elapsed:.0f}s)",
    )


def test_A9_estimator_equivalences():
    # proportional allocation: sample and population weighting agree
    proportions = (0.91, 0.84, 0.77)
    sample_pairs = list(zip((100, 60, 40), proportions))
    population_pairs = list(zip((10000, 6000, 4000), proportions))
    sample = pooled_proportion(sample_pairs)
    population = pooled_proportion(population_pairs)
    assert abs(sample - population) <= 1e-12

    # single-stratum total matches the classical formula
    for size, sd, se in ((1000, 0.5, 0.05), (80509, 0.243, 0.01), (500, 0.1, 0.02)):
        pooled = required_sample_size([StratumSpec(PosClass.NOUN, size, sd)], se).real
        classical = sd * sd / (se * se + sd * sd / size)
        assert abs(pooled - classical) <= 1e-9

    # scale invariance of the allocation fractions (scaled sd stays in [0, 0.5])
    base = neyman_fractions(REF_STRATA)
    for c in (0.25, 1.4):
        scaled = neyman_fractions(
            [StratumSpec(s.pos, s.size, s.sd * c) for s in REF_STRATA]
        )
        for a, b in zip(base, scaled):
            assert abs(a - b) <= 1e-12
    _ok("A9", "proportional-weights equality, classical-n equality, scale invariance")


def test_A10_event_sourcing_and_round_trip(tmp_path):
    spec = SimSpec(
        sizes={PosClass.NOUN: 200, PosClass.ADJECTIVE: 150, PosClass.VERB: 180},
        correct_rates={cls: 0.85 for cls in STRATUM_CLASSES},
        no_output_rates={cls: 0.1 for cls in STRATUM_CLASSES},
        seed=4242,
        replications=100,
    )
    corpus, oracle = synth_corpus(spec)
    study = create_study(corpus, StudyConfig(seed=4242, pilot_per_stratum=10, target_se=0.04))
    while study.phase is not StudyPhase.REPORTED:
        if study.phase in (StudyPhase.PILOT_DRAWN, StudyPhase.MAIN_DRAWN):
            auto_judge(study, oracle)
        study.advance_phase()

    replayed = replay_audit_log(corpus, study.audit_log)
    assert replayed.to_dict() == study.to_dict()

    path = tmp_path / "study.json"
    save_study(study, path)
    loaded = load_study(path, corpus)
    assert loaded.to_dict() == study.to_dict()
    _ok("A10", f"audit replay of {len(study.audit_log)} events and save/load both exact")
