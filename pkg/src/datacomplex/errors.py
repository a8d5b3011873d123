"""
Exception hierarchy for datacomplex.
Every error carries the exit code the CLI maps it to.
"""
from typing import Any, Dict, List, Optional


class DataComplexError(Exception):
    exit_code = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


# ----------------------------------------
# Input errors (exit 2)
# ----------------------------------------
class ConfigError(DataComplexError):
    """Malformed or invalid project/schema document."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        details: Dict[str, Any] = {}
        if field:
            details["field"] = field
        if line is not None:
            details["line"] = line
        super().__init__(message, details)
        self.field = field
        self.line = line


class SchemaViolationError(ConfigError):
    def __init__(self, violations: List[Any]):
        text = "; ".join(f"{v.field}: {v.message}" for v in violations)
        super().__init__(f"schema invalid: {text}", field=violations[0].field if violations else None)
        self.violations = violations


class IndexOutOfRangeError(DataComplexError, IndexError):
    pass


class InvalidInclusionError(DataComplexError):
    pass


class InvalidPermutationError(DataComplexError):
    pass


class MassMismatchError(DataComplexError):
    pass


class ListMismatchError(DataComplexError):
    pass


class InconsistentOverlapError(DataComplexError):
    pass


class IncompatibleHornError(DataComplexError):
    pass


class SectionError(DataComplexError):
    pass


class DisconnectedComplexError(DataComplexError):
    def __init__(self, components: List[List[str]]):
        names = " | ".join(",".join(c) for c in components)
        super().__init__(f"data complex is not path-connected; components: {names}",
                         {"components": components})
        self.components = components


class FaceClosureError(DataComplexError):
    pass


# ----------------------------------------
# Ingestion (exit 3)
# ----------------------------------------
class IngestionError(DataComplexError):
    exit_code = 3

    def __init__(self, message: str, source: Optional[str] = None, row: Optional[int] = None):
        details: Dict[str, Any] = {}
        if source:
            details["source"] = source
        if row is not None:
            details["row"] = row
        super().__init__(message, details)


# ----------------------------------------
# Solver (exit 4 / 5)
# ----------------------------------------
class BudgetExceededError(DataComplexError):
    exit_code = 4

    def __init__(self, message: str, sizes: Optional[Dict[str, int]] = None):
        super().__init__(message, dict(sizes or {}))
        self.sizes = dict(sizes or {})


class SolverInvariantError(DataComplexError):
    exit_code = 5
