"""Exception types raised by the estimation and data layers."""

from __future__ import annotations


class PolyaAeppliError(Exception):
    """Base class for every error raised by this package."""


# -- data ------------------------------------------------------------------


class DataError(PolyaAeppliError, ValueError):
    """Input data could not be read or is unusable."""


class MalformedLine(DataError):
    def __init__(self, line_no: int, reason: str = "malformed record"):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class InconsistentDimension(DataError):
    def __init__(self, line_no: int, expected: int, got: int):
        self.line_no = line_no
        super().__init__(f"line {line_no}: expected {expected} columns, got {got}")


class MalformedCell(DataError):
    def __init__(self, row: int, col: int, reason: str = "malformed cell"):
        self.row, self.col = row, col
        super().__init__(f"cell (row {row}, col {col}): {reason}")


class ZeroMeanCoordinate(DataError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"coordinate {index + 1} has zero sample mean")


# -- estimation ------------------------------------------------------------


class EstimationError(PolyaAeppliError, ArithmeticError):
    """An estimator could not produce admissible parameter values."""


class UnderdispersedSample(EstimationError):
    def __init__(self, rho_hat: float):
        self.rho_hat = rho_hat
        super().__init__(f"rho estimate {rho_hat:.6g} is not positive (sample is not overdispersed)")


class NegativeCommonRate(EstimationError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"lambda_common estimate {value:.6g} is not positive")


class NegativeMarginRate(EstimationError):
    def __init__(self, index: int, value: float):
        self.index, self.value = index, value
        super().__init__(f"lambda_{index + 1} estimate {value:.6g} is not positive")


class NegativeSqrtArgument(EstimationError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"radicand of the rho update is {value:.6g} (< 0)")


class NonConvergence(EstimationError):
    def __init__(self, iterations: int, detail: str = ""):
        self.iterations = iterations
        msg = f"no convergence after {iterations} iterations"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class LineSearchFailure(EstimationError):
    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"no ascent step found at iteration {iteration}")


class ConvergenceWarning(UserWarning):
    """An iterative fit stopped at ``max_iter``; the best iterate is returned."""


# -- oracle ----------------------------------------------------------------


class TruncationTooLoose(PolyaAeppliError, ValueError):
    def __init__(self, tail_bound: float, tolerance: float):
        super().__init__(f"truncation tail bound {tail_bound:.3g} exceeds tolerance {tolerance:.3g}")
