"""Exception types shared across the package."""


class LithoError(Exception):
    """Base class for all lithocheck errors."""


class ParseError(LithoError):
    """Malformed input file.  Carries the 1-based line (and column when known)."""

    def __init__(self, message, line=None, column=None, filename=None):
        self.line = line
        self.column = column
        self.filename = filename
        where = ""
        if filename:
            where += f"{filename}:"
        if line is not None:
            where += f"line {line}"
            if column is not None:
                where += f", col {column}"
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(LithoError):
    """Structurally valid input that violates a model invariant."""


class MatchError(LithoError):
    """Pattern/layout mismatch in the matcher (e.g. unknown layer)."""


class GridError(LithoError):
    """Routing grid cannot be constructed for the given die/tech."""


class RouteError(LithoError):
    """Routing failed hard (skip fraction above the configured limit)."""


class ScenarioError(LithoError):
    """Scenario generation failed (e.g. a cell without signal pins)."""


class ConfigError(LithoError):
    """Bad run configuration or settings file."""
