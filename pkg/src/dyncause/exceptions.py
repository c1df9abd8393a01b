"""Exception hierarchy shared by every stage of the pipeline."""


class DyncauseError(Exception):
    """Base class for all errors raised by dyncause."""

    module = "dyncause"

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class NonPositiveValue(DyncauseError):
    module = "transform"

    def __init__(self, row: int, col: int, value: float) -> None:
        self.row, self.col, self.value = row, col, value
        super().__init__(f"value {value!r} at row {row}, column {col} is not strictly positive")


class InsufficientObservations(DyncauseError):
    module = "var_engine"


class SingularDesign(DyncauseError):
    module = "var_engine"


class NonPositiveDefinite(DyncauseError):
    module = "var_engine"


class SingularCovariance(DyncauseError):
    module = "causality"


class LeverageOutOfRange(DyncauseError):
    module = "bootstrap"


class TooManySingularReplications(DyncauseError):
    module = "bootstrap"


class WindowExceedsSample(DyncauseError):
    module = "dynamic"


class NonPositiveCriticalValue(DyncauseError):
    module = "dynamic"


class ParseError(DyncauseError):
    module = "cli_report"

    def __init__(self, message: str, line: int | None = None, col: int | None = None) -> None:
        self.line, self.col = line, col
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {col})" if col is not None else ")")
        super().__init__(message + where)


class MissingValue(ParseError):
    pass


class NonMonotonicDates(ParseError):
    pass


class ConfigError(DyncauseError):
    module = "cli_report"
