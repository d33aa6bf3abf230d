"""Stratified two-phase evaluation of per-token annotators.

Estimates precision, recall and F over a tagged corpus from human
judgments of an optimally allocated random sample, with confidence
intervals and Monte Carlo validation of the whole pipeline.
"""

from .corpus import (
    STRATUM_CLASSES,
    Corpus,
    FrequencyTable,
    PosClass,
    TokenRecord,
    context_window,
    frequency_table,
    load_corpus,
    parse_corpus,
    pos_class,
    serialize_corpus,
)
from .estimation import (
    EvaluationReport,
    WeightMode,
    bernoulli_sd,
    build_report,
    confidence_interval,
    f_measure,
    normal_quantile,
    pooled_proportion,
    stratified_se,
    stratum_proportions,
)
from .sampling import (
    AllocationPlan,
    RandomState,
    SampleDraw,
    StratumSpec,
    allocate_counts,
    main_draw,
    neyman_fractions,
    next_random,
    pilot_draw,
    required_sample_size,
    sample_without_replacement,
    target_se_for_margin,
)
from .simulator import SimSpec, auto_judge, coverage_experiment, synth_corpus
from .study import (
    Judgment,
    StudyConfig,
    StudyPhase,
    StudyState,
    Verdict,
    compute_allocation,
    create_study,
    load_study,
    replay_audit_log,
    save_study,
)

__version__ = "0.1.0"
