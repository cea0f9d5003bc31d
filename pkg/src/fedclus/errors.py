"""Exception types shared across the package."""


class FedClusError(Exception):
    """Base class for all package errors."""


class ConfigError(FedClusError, ValueError):
    pass


class InsufficientSamples(FedClusError):
    pass


class ConstantFeature(FedClusError):
    def __init__(self, index: int):
        super().__init__(f"feature {index} has zero variance in the training split")
        self.index = index


class ParseError(FedClusError):
    def __init__(self, line: int, column: str, reason: str = ""):
        msg = f"line {line}, column {column!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line = line
        self.column = column


class MissingLabelColumn(FedClusError):
    pass


class DimensionMismatch(FedClusError, ValueError):
    pass


class TopologyMismatch(FedClusError):
    pass


class UnknownLinkClass(FedClusError, KeyError):
    pass


class LengthMismatch(FedClusError, ValueError):
    pass


class EmptyInput(FedClusError, ValueError):
    pass


class SingleClassInput(FedClusError, ValueError):
    pass


class SchemaError(ConfigError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


class ReportParseError(FedClusError):
    pass
