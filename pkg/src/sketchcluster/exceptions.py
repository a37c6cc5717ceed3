"""Custom exceptions for sketchcluster."""

from __future__ import annotations


class SketchClusterError(Exception):
    """Base exception for all sketchcluster errors."""

    pass


class ValidationError(SketchClusterError, ValueError):
    """Raised when an input or parameter is outside its valid range."""

    pass


class ConfigError(ValidationError):
    """Raised when a config file cannot be read or is inconsistent."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class NoObservationsError(ValidationError):
    """Raised when a sketch has no observed off-diagonal entries."""

    def __init__(self, n_nodes: int):
        self.n_nodes = n_nodes
        super().__init__(f"Sketch of {n_nodes} nodes has no observed off-diagonal entries")


class EdgeListParseError(SketchClusterError):
    """Raised when an edge-list file contains an invalid line."""

    def __init__(self, path: str, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}:{line_number}: {reason}")


class SolverError(SketchClusterError):
    """Raised when the sketch decomposition fails."""

    pass


class NumericalError(SolverError):
    """Raised when solver iterates become NaN or infinite."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"Non-finite values in solver iterates at iteration {iteration}")


class ClusteringError(SketchClusterError):
    """Raised when clusters cannot be extracted from a low-rank component."""

    pass


class ReportError(SketchClusterError):
    """Raised when writing an experiment artifact fails."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"Failed to write '{path}': {reason}")
