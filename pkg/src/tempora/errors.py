class TemporaError(Exception):
    pass


class UnknownVertex(TemporaError, KeyError):
    pass


class EmptyRelation(TemporaError, ValueError):
    pass


class SizeExceeded(TemporaError, ValueError):
    pass


class InvalidEpsilon(TemporaError, ValueError):
    pass


class InvalidAlpha(TemporaError, ValueError):
    pass


class EmptyTrace(TemporaError, ValueError):
    pass


class InapplicableStep(TemporaError, ValueError):
    pass


class ZeroLengthInterval(TemporaError, ValueError):
    pass


class Unanchored(TemporaError, LookupError):
    pass


class EmptyPool(TemporaError, ValueError):
    pass


class InvalidSize(TemporaError, ValueError):
    pass


class BudgetExhausted(TemporaError):
    """Search ran out of budget; ``trace`` holds the best partial trace."""

    def __init__(self, trace):
        super().__init__("search budget exhausted")
        self.trace = trace


class ConfigError(TemporaError, ValueError):
    pass


class MalformedInput(TemporaError, ValueError):
    pass
