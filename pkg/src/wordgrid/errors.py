"""Exception hierarchy shared across the toolkit."""


class WordGridError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(WordGridError):
    """Input data violates a basic precondition (bad coordinates, bad config)."""


class ParseError(WordGridError):
    """A record or file could not be decoded into the data model."""


class StructureError(WordGridError):
    """A table structure is inconsistent (overlapping spans, ragged rows, ...)."""


class StructureConflictError(StructureError):
    """Classified relations contradict each other (cycle, forced tie).

    ``cycle`` holds the offending edge list when a cycle was detected, so a
    repair pass can pick an edge to drop.
    """

    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = list(cycle) if cycle else []


class PlacementConflictError(StructureError):
    """Two cells claimed the same grid slot during materialization."""


class UnassignedWordError(WordGridError, LookupError):
    """A word has no ground-truth cell assignment."""


class TransportError(WordGridError):
    """The remote classifier service could not be reached."""


class ProtocolError(WordGridError):
    """The remote classifier service answered outside the wire contract."""
