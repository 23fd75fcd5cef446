"""Exception hierarchy shared by every module of the toolkit."""


class ClosureError(Exception):
    """Base class for all toolkit errors."""


class UnknownNameError(ClosureError, KeyError):
    """A variable name or alphabet label does not resolve."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ArgumentError(ClosureError, ValueError):
    pass


class NameCollisionError(ArgumentError):
    pass


class NullEventError(ClosureError, ValueError):
    """Conditioning on an event of probability zero."""


class LimitError(ClosureError, ValueError):
    """A configured horizon, arity or table-size limit was exceeded."""


class SchemaError(ClosureError, ValueError):
    """Malformed input artifact (distribution, scenario, table, trajectories).

    ``where`` carries a JSON path or ``file:line`` locator when available.
    """

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class UnsupportedViewError(ClosureError):
    """The requested view is not available for how the object was authored."""
