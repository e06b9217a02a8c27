"""Error types shared across the package.

Input problems (bad files, malformed records) raise subclasses of
InputError so callers can map them to a single failure class without
inspecting messages.  Everything else is a DataError: the file parsed
fine but the content breaks a documented precondition.
"""

from __future__ import annotations


class FancastError(Exception):
    """Base class for all package errors."""


class InputError(FancastError):
    """A file or payload could not be read or parsed."""


class ParseError(InputError):
    """Malformed line in an input file.  Carries the 1-based line number."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += path
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)


class DataError(FancastError):
    """Well-formed input that violates a documented precondition."""


class SelfEdgeError(DataError):
    """A user cannot watch themselves."""


class DuplicateVoterError(DataError):
    """The same user appears twice in one story's vote list."""


class SubmitterMismatchError(DataError):
    """First vote row of a story names a different user than the story's submitter."""


class UnknownStoryError(DataError):
    """A vote row references a story_id that was never declared."""


class EmptyCorpusError(DataError):
    """An operation that needs at least one story got none."""


class EmptyTestsetError(DataError):
    """Evaluation requires at least one labeled example."""


class TooFewExamplesError(DataError):
    """Cross-validation requires more examples than folds."""


class NoPromotedStoriesError(DataError):
    """Baseline comparison needs at least one promoted story."""


class InfeasibleDegreeSequenceError(DataError):
    """The requested degree distribution cannot be realized on this many users."""


class SimulationYieldError(DataError):
    """front_page sampling could not collect enough promoted stories."""


class ConfigError(InputError):
    """Bad simulation config: unknown key, missing value, or wrong type."""
