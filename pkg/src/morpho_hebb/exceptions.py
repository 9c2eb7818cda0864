"""Exception hierarchy shared across the package."""


class MorphoHebbError(Exception):
    """Base class for all package errors."""


class AlphabetError(MorphoHebbError, ValueError):
    """A symbol outside the active alphabet was supplied."""


class HierarchyOrderError(MorphoHebbError):
    """A level was requested before the levels below it were built."""


class ConsistencyError(MorphoHebbError):
    """Internal state does not agree with itself (stale refs, broken DAG, ...)."""


class PreconditionError(MorphoHebbError, ValueError):
    """An operation was called outside its domain."""


class AllocationError(MorphoHebbError, KeyError):
    """An embedding id was used before being allocated."""


class CompressionError(ConsistencyError):
    """A compressed chain failed its equivalence check."""


class DocumentError(MorphoHebbError, ValueError):
    """A persisted document could not be parsed."""


class VersionError(DocumentError):
    """A persisted document carries an unsupported version."""
