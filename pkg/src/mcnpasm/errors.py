"""Exceptions and warning categories raised by the deck tools."""


class McnpError(Exception):
    """Base class for every error raised by this package."""


class ParseError(McnpError):
    """Input text could not be turned into a deck.

    ``errors`` holds the individual card errors when several were collected.
    """

    def __init__(self, message, line=None, column=None, errors=None):
        self.line = line
        self.column = column
        self.errors = list(errors or [])
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class CardSyntaxError(ParseError):
    pass


class MissingBlock(ParseError):
    pass


class UnsupportedForm(ParseError):
    pass


class DuplicateId(ParseError):
    pass


class MultipleMetadataBlocks(ParseError):
    pass


class NotAssemblable(McnpError):
    def __init__(self, message, diagnostics=()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)


class UnsupportedBoundingExpression(McnpError):
    pass


class UnknownCell(McnpError, KeyError):
    pass


class GasOrGraveyardSelected(McnpError):
    pass


class UnknownGroup(McnpError, KeyError):
    pass


class UnknownKey(McnpError, KeyError):
    pass


class UnknownTransform(McnpError, KeyError):
    pass


class ZeroAxis(McnpError, ValueError):
    pass


class CapacityExceeded(McnpError):
    pass


class CollisionError(McnpError):
    pass


class UnsupportedMnemonic(McnpError):
    pass


class OnSurface(McnpError):
    """A probe point lies inside the tolerance band of a surface."""


class PlanError(McnpError):
    def __init__(self, message, step=None):
        self.step = step
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(prefix + message)


class DeckWarning(UserWarning):
    """Recoverable problem found while reading or combining decks."""
