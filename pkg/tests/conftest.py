import pytest

from strataeval import STRATUM_CLASSES, parse_corpus
from strataeval.tagsets import REFERENCE_TAG_COUNTS


def corpus_bytes(rows):
    """Build corpus TSV bytes from (surface, tag, system_lemma, gold_lemma, doc_id)."""
    lines = ["\t".join(row) for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def simple_rows(tags, with_lemma=True):
    return [
        (f"w{i}", tag, f"l{i}" if with_lemma else "", "", "d0")
        for i, tag in enumerate(tags)
    ]


def build_table_fixture_bytes() -> bytes:
    """A corpus realizing the reference tag distributions exactly."""
    lines = []
    i = 0
    for cls in STRATUM_CLASSES:
        for tag, count in REFERENCE_TAG_COUNTS[cls].items():
            for _ in range(count):
                lines.append(f"w{i}\t{tag}\tl{i}\t\td0")
                i += 1
    return ("\n".join(lines) + "\n").encode("utf-8")


@pytest.fixture
def tiny_corpus():
    return parse_corpus(corpus_bytes(simple_rows(["N-msi", "Amsi", "V---f-r1s"])))


@pytest.fixture(scope="session")
def table_corpus():
    return parse_corpus(build_table_fixture_bytes())


@pytest.fixture(scope="session")
def table_corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixtures") / "tables.tsv"
    path.write_bytes(build_table_fixture_bytes())
    return path


def make_sim_corpus(sizes=(60, 50, 45), q=0.9, u=0.1, seed=7):
    """Small synthetic corpus plus its oracle, for study/server tests."""
    from strataeval.simulator import SimSpec, synth_corpus

    spec = SimSpec(
        sizes=dict(zip(STRATUM_CLASSES, sizes)),
        correct_rates={cls: q for cls in STRATUM_CLASSES},
        no_output_rates={cls: u for cls in STRATUM_CLASSES},
        seed=seed,
        replications=100,
    )
    return synth_corpus(spec)
