"""Exception hierarchy shared by every module."""


class StokesLabError(Exception):
    """Base class for all library errors."""


class ParseError(StokesLabError):
    """A document or literal could not be read."""


class ValidationError(StokesLabError):
    """Input data violates a structural or semantic condition.

    ``condition`` names the first violated check so callers (and the CLI)
    can report it without parsing the message.
    """

    def __init__(self, condition, message=None):
        self.condition = condition
        super().__init__(message or condition)


class DegenerateError(StokesLabError):
    """A geometric configuration is not generic enough (point on a cut, ...)."""


class InternalInvariantError(StokesLabError):
    """A computed object contradicts a property that must hold by theory."""
