"""Exception hierarchy shared by the engine, CLI, and HTTP service.

Every modeled failure carries a stable ``code`` used in CLI messages and in
HTTP error bodies ({code, message, detail}); computations never leak NaN in
place of raising one of these.
"""

from __future__ import annotations


class TempoCauseError(Exception):
    """Base class for all modeled failures."""

    code = "error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_payload(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


class IngestError(TempoCauseError):
    """The input file cannot be turned into a valid dataset."""

    code = "ingest_error"


class ValidationError(TempoCauseError):
    """An event, effect, window, or query is inconsistent with the dataset."""

    code = "invalid"


class NoOccurrences(TempoCauseError):
    """The conditioning event is never true, so occurrence ratios are undefined."""

    code = "no_occurrences"


class AllMissingInWindow(TempoCauseError):
    """The cause occurs, but every in-window effect value is missing."""

    code = "all_missing_in_window"


class NoObservations(TempoCauseError):
    """A base-rate or base-expectation query over an all-missing track."""

    code = "no_observations"


class InsufficientCauses(TempoCauseError):
    """Average significance needs at least two potential causes."""

    code = "insufficient_causes"


class EmptyCauseSet(TempoCauseError):
    """A delay sweep was requested with no significant causes."""

    code = "empty_cause_set"


class NoEvidence(TempoCauseError):
    """No cause-variable value ever precedes the effect within the window."""

    code = "no_evidence"


class NoSignificantCauses(TempoCauseError):
    """A flow-graph save was requested from a report with no significant causes."""

    code = "no_significant_causes"


class SchemaError(TempoCauseError):
    """A persisted artifact violates its JSON schema or referential rules."""

    code = "schema_error"


class NoEffect(TempoCauseError):
    """The session has no effect configured yet."""

    code = "no_effect"


class UnknownNode(TempoCauseError):
    code = "unknown_node"


class UnknownSession(TempoCauseError):
    code = "unknown_session"


class UnknownEvent(TempoCauseError):
    code = "unknown_event"


class DuplicateEvent(TempoCauseError):
    code = "duplicate_event"
