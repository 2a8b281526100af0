"""Exception hierarchy shared across the simulator."""


class CoopexError(Exception):
    """Base class for every error raised by this package."""


class GraphError(CoopexError, ValueError):
    pass


class CyclicGraph(GraphError):
    pass


class DanglingEdge(GraphError):
    pass


class UnknownGraph(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotAssigned(CoopexError, RuntimeError):
    """A task was reported done without ever being dispatched."""


class NoIdleAgent(CoopexError, RuntimeError):
    """More tasks were handed to assignment than there are idle agents."""


class SizeOutOfRange(CoopexError, ValueError):
    pass


class BudgetExhausted(CoopexError):
    pass


class SharesMismatch(CoopexError, ValueError):
    pass


class ConfigError(CoopexError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ConfigInvalid(ConfigError):
    """One or more fields of a run configuration are invalid.

    ``problems`` maps a dotted field path to a human readable message.
    """

    def __init__(self, problems):
        self.problems = dict(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in sorted(self.problems.items()))
        super().__init__(f"invalid configuration: {detail}")


class SchemaError(ConfigInvalid):
    pass


class UnknownPreset(CoopexError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
