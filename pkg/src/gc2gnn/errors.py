"""Exception types shared across the package."""


class GC2Error(Exception):
    """Base class for all errors raised by gc2gnn."""


class FormulaError(GC2Error):
    pass


class ParseError(GC2Error):
    """Syntax error in query text; ``span`` is a ``(start, end)`` offset pair."""

    def __init__(self, message, span):
        self.span = span
        super().__init__(f"{message} at offset {span[0]}")


class GraphFormatError(GC2Error):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ColorRangeError(GC2Error):
    pass


class PoleError(GC2Error, ZeroDivisionError):
    """A rational function was evaluated at a root of its denominator."""


class SingularMatrixError(GC2Error):
    def __init__(self, message, dependent_columns=()):
        self.dependent_columns = tuple(dependent_columns)
        super().__init__(f"{message} (dependent columns: {list(self.dependent_columns)})")


class ModelFormatError(GC2Error):
    """Schema violation in a model file; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DimensionError(GC2Error):
    pass


class CompileError(GC2Error):
    pass
