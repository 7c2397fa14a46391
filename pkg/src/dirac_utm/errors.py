"""Exception types raised by the solvers and the scenario runner."""


class DiracUTMError(Exception):
    """Base class for all package errors."""


class ConfigError(DiracUTMError):
    """Invalid scenario configuration.

    Parameters
    ----------
    message : str
        Human readable description.
    field : str, optional
        Dotted path of the offending field.
    line : int, optional
        Line number in the configuration file, when known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class SolverError(DiracUTMError):
    """Base class for numerical failures during a solve."""

    def __init__(self, message, term=None):
        self.term = term
        if term is not None:
            message = f"{message} (term: {term})"
        super().__init__(message)


class NonIntegrable(SolverError):
    """Adaptive quadrature did not converge within its panel budget."""


class QuadratureBudgetExceeded(SolverError):
    """The k-space truncation could not meet the requested tail tolerance."""


class TraceHorizonExceeded(SolverError):
    """A trace table was queried beyond the time it covers."""
