"""Corpus ingestion, POS classing, strata and tag frequency tables.

The corpus file format is UTF-8 TSV, one token per line::

    surface <TAB> tag <TAB> system_lemma <TAB> gold_lemma <TAB> doc_id

Empty ``system_lemma``/``gold_lemma`` columns mean *absent* (the annotator
produced no output for that token), which is distinct from any literal
lemma string.  Lines starting with ``#`` are comments; blank lines are
skipped.  There is no header row.

Tokens are classed by the first character of their morphosyntactic tag:
``N`` noun, ``A`` adjective, ``V`` verb, anything else *other*.  The three
open POS classes form the sampling strata; *other* tokens are kept so they
can be shown as context, but are never sampled.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import CorpusParseError


class PosClass(str, Enum):
    """Coarse POS class derived from the first tag character."""

    NOUN = "noun"
    ADJECTIVE = "adjective"
    VERB = "verb"
    OTHER = "other"

    @property
    def display(self) -> str:
        return self.value.capitalize()


#: the classes that form sampling strata, in canonical order
STRATUM_CLASSES = (PosClass.NOUN, PosClass.ADJECTIVE, PosClass.VERB)

_PREFIX_TO_CLASS = {
    "N": PosClass.NOUN,
    "A": PosClass.ADJECTIVE,
    "V": PosClass.VERB,
}


def pos_class(tag: str) -> PosClass:
    """Map a tag string to its POS class. Total on non-empty strings."""
    if not tag:
        raise ValueError("empty tag has no POS class")
    return _PREFIX_TO_CLASS.get(tag[0], PosClass.OTHER)


class TokenRecord(NamedTuple):
    """One corpus token: the unit of sampling and judgment."""

    index: int
    surface: str
    tag: str
    system_lemma: str | None = None
    gold_lemma: str | None = None
    doc_id: str = ""


class ContextWindow(NamedTuple):
    """Tokens around a center item; ``center`` is the offset into ``tokens``."""

    tokens: list[TokenRecord]
    center: int


@dataclass(frozen=True)
class FrequencyTable:
    """Counts of full tag strings within one POS class.

    ``entries`` iterates in canonical order: descending count, then
    lexicographic tag.
    """

    pos: PosClass
    entries: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def rows(self) -> list[tuple[str, int]]:
        return list(self.entries.items())


@dataclass(frozen=True)
class Corpus:
    """An immutable parsed corpus with its sampling strata.

    ``strata`` maps each of the three open POS classes to the ascending
    corpus indices of its tokens.  *Other* tokens appear only in
    ``records``.  ``digest`` identifies the exact source bytes; a corpus
    serialized with :func:`serialize_corpus` and re-parsed keeps the same
    digest.
    """

    records: tuple[TokenRecord, ...]
    strata: dict[PosClass, tuple[int, ...]]
    digest: str

    @property
    def total_tokens(self) -> int:
        return len(self.records)

    @property
    def population_size(self) -> int:
        """Number of tokens in the three sampled strata combined."""
        return sum(len(v) for v in self.strata.values())

    def stratum_sizes(self) -> dict[PosClass, int]:
        return {cls: len(self.strata[cls]) for cls in STRATUM_CLASSES}

    @classmethod
    def from_records(
        cls,
        records: Iterable[TokenRecord],
        digest: str | None = None,
        strata: dict[PosClass, tuple[int, ...]] | None = None,
    ) -> "Corpus":
        recs = tuple(records)
        if strata is None:
            buckets: dict[PosClass, list[int]] = {c: [] for c in STRATUM_CLASSES}
            for rec in recs:
                c = pos_class(rec.tag)
                if c is not PosClass.OTHER:
                    buckets[c].append(rec.index)
            strata = {c: tuple(ix) for c, ix in buckets.items()}
        if digest is None:
            digest = hashlib.sha256(_serialize_records(recs)).hexdigest()
        return cls(records=recs, strata=strata, digest=digest)


def parse_corpus(data: bytes) -> Corpus:
    """Parse corpus TSV bytes into a :class:`Corpus`.

    Raises :class:`CorpusParseError` (with a 1-based line number) on a
    wrong column count, an empty tag, or undecodable UTF-8.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusParseError(f"not valid UTF-8: {exc}") from None

    records: list[TokenRecord] = []
    buckets: dict[PosClass, list[int]] = {c: [] for c in STRATUM_CLASSES}
    index = 0
    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise CorpusParseError(
                f"expected 5 tab-separated columns, got {len(fields)}", line_no
            )
        surface, tag, system_lemma, gold_lemma, doc_id = fields
        if not tag:
            raise CorpusParseError("empty tag", line_no)
        records.append(
            TokenRecord(
                index=index,
                surface=surface,
                tag=tag,
                system_lemma=system_lemma or None,
                gold_lemma=gold_lemma or None,
                doc_id=doc_id,
            )
        )
        c = pos_class(tag)
        if c is not PosClass.OTHER:
            buckets[c].append(index)
        index += 1

    return Corpus(
        records=tuple(records),
        strata={c: tuple(ix) for c, ix in buckets.items()},
        digest=hashlib.sha256(data).hexdigest(),
    )


def load_corpus(path) -> Corpus:
    """Read and parse a corpus file."""
    with open(path, "rb") as fh:
        return parse_corpus(fh.read())


def _serialize_records(records: Iterable[TokenRecord]) -> bytes:
    lines = [
        "\t".join(
            (
                rec.surface,
                rec.tag,
                rec.system_lemma or "",
                rec.gold_lemma or "",
                rec.doc_id,
            )
        )
        for rec in records
    ]
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


def serialize_corpus(corpus: Corpus) -> bytes:
    """Canonical TSV serialization; parse(serialize(c)) preserves records."""
    return _serialize_records(corpus.records)


def frequency_table(corpus: Corpus, cls: PosClass) -> FrequencyTable:
    """Tag frequency distribution for one stratum class.

    Entry order is deterministic: descending count, ties broken by tag.
    """
    if cls not in STRATUM_CLASSES:
        raise ValueError(f"frequency tables exist only for stratum classes, not {cls.value!r}")
    counts = Counter(corpus.records[i].tag for i in corpus.strata[cls])
    ordered = dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return FrequencyTable(pos=cls, entries=ordered)


def context_window(corpus: Corpus, index: int, k: int) -> ContextWindow:
    """Tokens ``[index-k, index+k]`` clipped to corpus bounds, in order."""
    if not 0 <= index < len(corpus.records):
        raise IndexError(f"token index {index} out of range (corpus has {len(corpus.records)} tokens)")
    if k < 0:
        raise ValueError("window radius must be >= 0")
    start = max(0, index - k)
    end = min(len(corpus.records), index + k + 1)
    return ContextWindow(tokens=list(corpus.records[start:end]), center=index - start)
