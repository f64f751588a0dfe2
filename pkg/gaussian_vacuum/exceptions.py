from typing import Optional


class DomainError(ValueError):
    def __init__(self, message: str, value=None, branch_point: Optional[float] = None):
        super().__init__(message)
        self.value = value
        self.branch_point = branch_point


class ConvergenceError(ArithmeticError):
    def __init__(
        self,
        routine: str,
        iterations: Optional[int] = None,
        achieved: Optional[float] = None,
    ):
        super().__init__(routine)
        self.routine = routine
        self.iterations = iterations
        self.achieved = achieved

    def __str__(self) -> str:
        msg = f"{self.routine} did not converge"
        if self.iterations is not None:
            msg += f" after {self.iterations} iterations"
        if self.achieved is not None:
            msg += f" (achieved tolerance {self.achieved:.3e})"
        return msg


class QuadratureError(ConvergenceError):
    pass


class GridBoundaryError(ConvergenceError):
    def __init__(self, routine: str, location=None):
        super().__init__(routine)
        self.location = location

    def __str__(self) -> str:
        return (
            f"{self.routine}: minimum at {self.location} lies on the grid boundary, "
            "widen the grid"
        )


class RejectedSolution(ValueError):
    pass
