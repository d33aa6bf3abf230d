"""Command-line driver for the whole workflow.

Exit codes: 0 success, 2 usage, 3 data error (bad files/config),
4 state error (wrong phase, missing judgments).  Output is a human
table by default; ``--json`` switches to machine form.  Every command
that draws randomness takes ``--seed`` (decimal or 0x-hex), with the
STRATAEVAL_SEED environment variable as fallback.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click

from .corpus import STRATUM_CLASSES, PosClass, context_window, frequency_table, load_corpus
from .errors import DataError, StateError
from .estimation import WeightMode, build_report
from .sampling import MASK64
from .simulator import SimSpec, coverage_experiment
from .study import (
    StudyConfig,
    StudyPhase,
    StudyState,
    Verdict,
    create_study,
    load_study,
    save_study,
)

_CLASS_CHOICES = click.Choice([cls.value for cls in STRATUM_CLASSES], case_sensitive=False)


def _parse_seed(_ctx, _param, value):
    if value is None:
        return None
    text = str(value).strip().lower()
    try:
        seed = int(text, 16) if text.startswith("0x") else int(text, 10)
    except ValueError:
        raise click.BadParameter("seed must be a decimal or 0x-prefixed hex integer")
    if not 0 <= seed <= MASK64:
        raise click.BadParameter("seed must fit in 64 bits")
    return seed


def _domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StateError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)
        except (DataError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _echo_json(data) -> None:
    click.echo(json.dumps(data, ensure_ascii=False, sort_keys=True, separators=(",", ":")))


def _load_bundle(study_path, corpus_path):
    corpus = load_corpus(corpus_path)
    return corpus, load_study(study_path, corpus)


@click.group()
def cli():
    """Stratified two-phase evaluation of per-token annotators."""


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@_domain_errors
def validate(corpus_path, as_json):
    """Parse a corpus file and report its stratum sizes."""
    corpus = load_corpus(corpus_path)
    sizes = corpus.stratum_sizes()
    other = corpus.total_tokens - corpus.population_size
    if as_json:
        _echo_json(
            {
                "total_tokens": corpus.total_tokens,
                "strata": {cls.value: sizes[cls] for cls in STRATUM_CLASSES},
                "other": other,
                "digest": corpus.digest,
            }
        )
    else:
        parts = ", ".join(f"{cls.display} {sizes[cls]}" for cls in STRATUM_CLASSES)
        click.echo(f"{corpus.total_tokens} tokens ({parts}, Other {other})")


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--class", "cls_name", type=_CLASS_CHOICES, required=True)
@click.option("--json", "as_json", is_flag=True)
@_domain_errors
def freq(corpus_path, cls_name, as_json):
    """Tag frequency table for one stratum class."""
    corpus = load_corpus(corpus_path)
    table = frequency_table(corpus, PosClass(cls_name.lower()))
    if as_json:
        _echo_json({"class": table.pos.value, "total": table.total, "entries": table.entries})
    else:
        for tag, count in table.rows():
            click.echo(f"{tag:<14} {count:>8}")
        click.echo(f"{'total':<14} {table.total:>8}")


@cli.group()
def study():
    """Create and run a two-phase evaluation study."""


@study.command("init")
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--study", "study_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", callback=_parse_seed, envvar="STRATAEVAL_SEED", required=True,
              help="64-bit seed (decimal or 0x-hex); STRATAEVAL_SEED is the fallback")
@click.option("--pilot", default=40, show_default=True, help="pilot draws per stratum")
@click.option("--target-se", type=float, default=None, help="target SE of the pooled estimate")
@click.option("--margin", type=float, default=None, help="margin of error (alternative to --target-se)")
@click.option("--confidence", default=0.95, show_default=True)
@click.option("--beta", default=1.0, show_default=True, help="F-measure beta")
@click.option("--context", default=5, show_default=True, help="context window radius")
@click.option("--weight-mode", type=click.Choice(["population", "sample"]), default="population", show_default=True)
@click.option("--sigma-source", type=click.Choice(["recall", "precision"]), default="recall", show_default=True)
@click.option("--sd-corrected", is_flag=True, help="use the sample-SD divisor for pilot sigmas")
@click.option("--no-fpc", is_flag=True, help="disable the finite population correction")
@click.option("--n-total", "n_override", type=int, default=None,
              help="fix the total sample size (must be at least the computed one)")
@_domain_errors
def study_init(corpus_path, study_path, seed, pilot, target_se, margin, confidence, beta,
               context, weight_mode, sigma_source, sd_corrected, no_fpc, n_override):
    """Create a study file for CORPUS_PATH."""
    corpus = load_corpus(corpus_path)
    config = StudyConfig(
        seed=seed,
        pilot_per_stratum=pilot,
        target_se=target_se,
        margin=margin,
        confidence_level=confidence,
        f_beta=beta,
        context_radius=context,
        weight_mode=WeightMode(weight_mode),
        sigma_source=sigma_source,
        sd_corrected=sd_corrected,
        use_fpc=not no_fpc,
        n_override=n_override,
    )
    state = create_study(corpus, config)
    save_study(state, study_path)
    click.echo(f"study created: phase {state.phase.value}, "
               f"pilot {pilot}/stratum, target SE {config.resolved_target_se():.6g}")


def _study_options(fn):
    fn = click.option("--corpus", "corpus_path", required=True,
                      type=click.Path(exists=True, dir_okay=False))(fn)
    fn = click.option("--study", "study_path", required=True,
                      type=click.Path(exists=True, dir_okay=False))(fn)
    return fn


@study.command("pilot")
@_study_options
@_domain_errors
def study_pilot(study_path, corpus_path):
    """Draw the pilot sample."""
    _, state = _load_bundle(study_path, corpus_path)
    if state.phase is not StudyPhase.CREATED:
        raise StateError(f"pilot already drawn (phase {state.phase.value})")
    state.advance_phase()
    save_study(state, study_path)
    sizes = state.pilot.sizes()
    parts = ", ".join(f"{cls.display} {sizes[cls]}" for cls in STRATUM_CLASSES)
    click.echo(f"pilot drawn: {parts} ({state.pilot.total} items)")


@study.command("allocate")
@_study_options
@click.option("--json", "as_json", is_flag=True)
@_domain_errors
def study_allocate(study_path, corpus_path, as_json):
    """Compute sigmas from the judged pilot and allocate the total sample."""
    _, state = _load_bundle(study_path, corpus_path)
    if state.phase not in (StudyPhase.PILOT_DRAWN, StudyPhase.PILOT_JUDGED):
        raise StateError(f"cannot allocate from phase {state.phase.value}")
    while state.phase is not StudyPhase.ALLOCATED:
        state.advance_phase()
    save_study(state, study_path)
    plan = state.plan
    if as_json:
        _echo_json(
            {
                "plan": plan.to_dict(),
                "sigmas": {cls.value: state.pilot_sigmas[cls] for cls in STRATUM_CLASSES},
            }
        )
        return
    click.echo(f"n_total {plan.n_total}")
    for j, cls in enumerate(STRATUM_CLASSES):
        click.echo(
            f"{cls.display:<10} sigma {state.pilot_sigmas[cls]:.4f}  fraction {plan.fractions[j]:.4f}"
            f"  count {plan.counts[j]}  second phase {plan.second_phase_counts[j]}"
        )


@study.command("draw")
@_study_options
@_domain_errors
def study_draw(study_path, corpus_path):
    """Draw the second-phase sample."""
    _, state = _load_bundle(study_path, corpus_path)
    if state.phase is not StudyPhase.ALLOCATED:
        raise StateError(f"cannot draw the main sample from phase {state.phase.value}")
    state.advance_phase()
    save_study(state, study_path)
    sizes = state.main.sizes()
    parts = ", ".join(f"{cls.display} {sizes[cls]}" for cls in STRATUM_CLASSES)
    click.echo(f"main sample drawn: {parts} ({state.main.total} items)")


def _show_item(state: StudyState, index: int) -> None:
    corpus = state.corpus
    record = corpus.records[index]
    window = context_window(corpus, index, state.config.context_radius)
    rendered = " ".join(
        f"[{tok.surface}]" if off == window.center else tok.surface
        for off, tok in enumerate(window.tokens)
    )
    lemma = record.system_lemma if record.system_lemma is not None else "(no output)"
    click.echo(f"#{index}  tag {record.tag}  system lemma: {lemma}")
    click.echo(f"  {rendered}")


@study.command("judge")
@_study_options
@click.option("--stratum", type=_CLASS_CHOICES, default=None, help="judge only this stratum")
@click.option("--judge-id", default="cli", show_default=True)
@_domain_errors
def study_judge(study_path, corpus_path, stratum, judge_id):
    """Judge drawn items in a terminal prompt loop (c/w/n keys, q quits)."""
    _, state = _load_bundle(study_path, corpus_path)
    cls = PosClass(stratum.lower()) if stratum else None
    judged = 0
    while True:
        index = state.next_unjudged(cls)
        if index is None:
            click.echo("no unjudged items remain in scope")
            break
        _show_item(state, index)
        has_output = state.corpus.records[index].system_lemma is not None
        keys = "c=correct, w=wrong, q=quit" if has_output else "n=no-output, q=quit"
        key = click.prompt(f"verdict ({keys})", type=str).strip().lower()
        if key == "q":
            break
        mapping = {"c": Verdict.CORRECT, "w": Verdict.WRONG, "n": Verdict.NO_OUTPUT}
        if key not in mapping:
            click.echo("unrecognized key", err=True)
            continue
        try:
            state.record_judgment(index, mapping[key], judge_id)
        except StateError as exc:
            click.echo(f"rejected: {exc}", err=True)
            continue
        save_study(state, study_path)
        judged += 1
    click.echo(f"{judged} judgments recorded")


@study.command("report")
@_study_options
@click.option("--mode", type=click.Choice(["population", "sample"]), default=None,
              help="weight mode shown as primary (default: the study's configured mode)")
@click.option("--json", "as_json", is_flag=True)
@_domain_errors
def study_report(study_path, corpus_path, mode, as_json):
    """Finalize the study if needed and print the evaluation report."""
    from dataclasses import replace

    _, state = _load_bundle(study_path, corpus_path)
    if state.phase in (StudyPhase.CREATED, StudyPhase.PILOT_DRAWN, StudyPhase.PILOT_JUDGED,
                       StudyPhase.ALLOCATED):
        raise StateError(f"study not complete (phase {state.phase.value})")
    changed = False
    while state.phase is not StudyPhase.REPORTED:
        state.advance_phase()
        changed = True
    if changed:
        save_study(state, study_path)
    report = build_report(state)
    if mode:
        report = replace(report, weight_mode=WeightMode(mode))
    if as_json:
        _echo_json(report.to_dict())
    else:
        click.echo(report.to_text())


@cli.group()
def simulate():
    """Monte Carlo validation of the estimation pipeline."""


@simulate.command("coverage")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", callback=_parse_seed, envvar="STRATAEVAL_SEED", default=None,
              help="overrides the seed in the spec file")
@click.option("--replications", type=int, default=None, help="overrides the spec file")
@click.option("--target-se", type=float, default=None, help="overrides the spec file (default 0.01)")
@click.option("--pilot", default=40, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="write one CSV row per replication")
@click.option("--verbose", is_flag=True, help="progress on stderr")
@_domain_errors
def simulate_coverage(spec_path, seed, replications, target_se, pilot, as_json, csv_path, verbose):
    """Run SPEC_PATH (JSON) and report CI coverage against the known truth."""
    with open(spec_path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if seed is not None:
        raw["seed"] = seed
    if replications is not None:
        raw["replications"] = replications
    if "seed" not in raw:
        raise click.UsageError("no seed: provide --seed, STRATAEVAL_SEED, or a seed in the spec file")
    if target_se is None:
        target_se = float(raw.get("target_se", 0.01))
    spec = SimSpec.from_dict(raw)

    progress = None
    if verbose:
        every = max(1, spec.replications // 20)

        def progress(done, total):
            if done % every == 0 or done == total:
                click.echo(f"  {done}/{total} replications", err=True)

    result = coverage_experiment(spec, target_se, pilot_per_stratum=pilot, progress=progress)

    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(ReplicationFields)
            for row in result.rows:
                writer.writerow(row)
    if as_json:
        _echo_json(result.to_dict())
    else:
        cov_p = f"{result.coverage_precision:.4f}" if result.coverage_precision is not None else "n/a"
        click.echo(f"replications      {result.replications}")
        click.echo(f"coverage (recall) {result.coverage_recall:.4f}")
        click.echo(f"coverage (prec.)  {cov_p}")
        click.echo(f"mean n            {result.mean_n:.1f}")
        click.echo(f"mean CI width     {result.mean_width:.5f}")


ReplicationFields = (
    "replication", "seed", "n_total",
    "recall_hat", "recall_lo", "recall_hi", "recall_truth", "recall_covered",
    "precision_hat", "precision_lo", "precision_hi", "precision_truth", "precision_covered",
)


@cli.command()
@click.option("--study", "study_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="static directory with the built review UI")
@_domain_errors
def serve(study_path, corpus_path, host, port, ui_dir):
    """Serve the review API (and UI, if built) for one study."""
    from .server import serve as run_server

    if ui_dir is None:
        candidate = Path("frontend") / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    run_server(study_path, corpus_path, host=host, port=port, ui_dir=ui_dir)


def main(argv=None):
    return cli(args=argv, standalone_mode=True)


if __name__ == "__main__":
    main()
