"""Exception types shared across the package."""


class DLassoError(Exception):
    """Base class for all package errors."""


class InvalidDataError(DLassoError):
    """Input data violates a basic contract (non-finite entries, bad shape)."""


class DimensionError(DLassoError):
    """Array dimensions do not agree."""


class DegenerateColumnError(DLassoError):
    """A nodewise regression reproduced its target column exactly."""

    def __init__(self, j: int, tau_sq: float):
        self.j = j
        self.tau_sq = tau_sq
        super().__init__(
            f"column {j}: tau_sq={tau_sq:.3e} <= 1e-12, cannot standardize"
        )


class SaturatedModelError(DLassoError):
    """Active set as large as the sample size; residual variance undefined."""


class InvalidPrecisionError(DLassoError):
    """Precision surrogate has a non-positive variance entry."""


class NotSpdError(DLassoError):
    """A matrix required to be symmetric positive definite is not."""


class GenerationError(DLassoError):
    """Random instance generation failed (non-finite eigensolve)."""


class ConfigError(DLassoError):
    """Invalid simulation or experiment configuration."""


class SchemaError(ConfigError):
    """Config file violates the expected JSON schema."""


class CsvParseError(DLassoError):
    """CSV input is malformed; carries the 1-based offending line number."""

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ExperimentError(DLassoError):
    """Too many replications failed to aggregate a report."""
