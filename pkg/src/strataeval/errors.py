"""Exception hierarchy shared across the package.

Two broad families matter for callers (and for CLI exit codes):

* :class:`DataError` -- the inputs are bad: malformed corpus files,
  impossible configurations, drifted or unreadable state files.
* :class:`StateError` -- the request is valid in general but not in the
  study's current state: wrong phase, missing judgments, undrawn items.
"""


class StrataEvalError(Exception):
    """Base class for all package errors."""

    #: short machine-readable code, overridden by subclasses
    code = "error"

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}

    @property
    def message(self) -> str:
        return str(self)


class DataError(StrataEvalError):
    code = "data_error"


class StateError(StrataEvalError):
    code = "state_error"


class CorpusParseError(DataError):
    code = "corpus_parse_error"

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message, {"line": line_no})
        self.line_no = line_no


class AllocationError(DataError):
    """Degenerate or impossible sample allocation."""

    code = "allocation_error"


class UndersizedStratumError(DataError):
    """A stratum is too small for the requested draw."""

    code = "undersized_stratum"


class DrawError(StateError):
    """Not enough undrawn population left to satisfy a draw."""

    code = "draw_error"


class PhaseError(StateError):
    """Operation not permitted in the study's current phase."""

    code = "phase_error"


class IncompleteStudyError(StateError):
    """Judgments are still missing for drawn items."""

    code = "incomplete_study"


class UnknownItemError(StateError):
    """Item index is not part of any draw (or not in the corpus)."""

    code = "item_not_drawn"


class JudgmentError(StateError):
    """Verdict inconsistent with the item (e.g. no-output on a produced lemma)."""

    code = "verdict_inconsistent"


class CorpusDriftError(DataError):
    """Stored corpus digest does not match the corpus on disk."""

    code = "corpus_drift"


class VersionError(DataError):
    """Study file schema version not supported."""

    code = "unsupported_version"


class SimSpecError(DataError):
    """Invalid simulation specification."""

    code = "sim_spec_error"
