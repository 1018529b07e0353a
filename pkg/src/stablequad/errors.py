"""Exception hierarchy shared by all stablequad modules."""


class StablequadError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(StablequadError, ValueError):
    """An argument is outside its documented domain."""


class ConstructionError(StablequadError):
    """An internal construction step produced an inconsistent object."""


class SamplingBudgetError(StablequadError):
    """The rejection sampler exhausted its trial budget.

    Carries the number of trials attempted so the caller can retry
    with a new seed or a larger budget.
    """

    def __init__(self, message: str, trials: int):
        super().__init__(message)
        self.trials = trials


class CodingError(StablequadError):
    """A tree/path coding is malformed (bad excursion, bad offspring sums)."""


class AdmissibilityError(StablequadError):
    """Vertex labels violate the unit-increment admissibility constraint."""


class InvariantViolation(StablequadError):
    """A theorem-backed invariant failed; this always indicates a bug."""


class ParseError(StablequadError):
    """A data file could not be parsed.

    ``line`` is the 1-based line number of the offending input, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(StablequadError):
    """An experiment configuration is unusable (e.g. empty fit window)."""
