from typing import Any, Dict, List, Optional, Sequence


class LarrError(Exception):
    """
    Base class for every failure the simulation reports to its caller
    """
    exit_code: int = 1
    category: str = "error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.category,
            "type": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class ConfigError(LarrError):
    """
    Invalid or inconsistent configuration; carries the offending field path
    """
    exit_code = 1
    category = "config_error"

    def __init__(self, message: str, field: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.field = field
        if field is not None:
            self.details.setdefault("field", field)


class NumericalError(LarrError):
    """
    A numerical routine failed; indices name the grid points affected
    """
    exit_code = 2
    category = "numerical_error"

    def __init__(self, message: str, indices: Optional[Sequence[int]] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.indices: List[int] = list(indices or [])
        if self.indices:
            self.details.setdefault("indices", self.indices)


class BranchCutError(NumericalError):
    category = "branch_cut"


class NonConvergenceError(NumericalError):
    category = "non_convergence"


class StepSizeCollapseError(NumericalError):
    category = "step_size_collapse"


class ThresholdError(NumericalError):
    """Photon energy at or below the binding threshold"""
    category = "threshold"


class NonFiniteError(NumericalError):
    category = "non_finite"


class OutputError(LarrError):
    exit_code = 3
    category = "output_error"
