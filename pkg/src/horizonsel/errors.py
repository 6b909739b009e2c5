"""Exception hierarchy shared across the package."""


class HorizonSelError(ValueError):
    """Base class for all domain errors raised by horizonsel."""


class InvalidSeries(HorizonSelError):
    pass


class SeriesTooShort(HorizonSelError):
    pass


class LengthMismatch(HorizonSelError):
    pass


class EmptyInput(HorizonSelError):
    pass


class FlatTrainingSeries(HorizonSelError):
    """RMSSE scaling is zero because every training first difference is zero."""


class ZeroTotalDemand(HorizonSelError):
    """GRA is undefined when the realised volume sums to zero."""


class TrajectoryTooShort(HorizonSelError):
    pass


class InvalidHorizon(HorizonSelError):
    pass


class HistoryTooShort(HorizonSelError):
    pass


class InvalidParams(HorizonSelError):
    pass


class MissingMetric(HorizonSelError):
    pass


class NoUsableMetric(HorizonSelError):
    pass


class DegenerateSample(HorizonSelError):
    pass


class MalformedRow(HorizonSelError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class NonContiguousPeriods(HorizonSelError):
    pass


class NegativeValue(HorizonSelError):
    def __init__(self, line: int, value: float):
        super().__init__(f"line {line}: negative value {value!r}")
        self.line = line
        self.value = value


class ConfigError(HorizonSelError):
    """A config field failed validation; ``field`` names the offending key."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason
