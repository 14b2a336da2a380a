"""
Smooth convex losses L(theta; Z_1..Z_n) with values and gradients.

* squared-error loss of the linear model, ||y - X theta||^2 / (2n)
* negative log-likelihood of a GLM with cumulant b,
  (1/n) sum_i b(x_i' theta) - y_i x_i' theta
"""

from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
from scipy.special import expit

from src.config import get_settings
from src.models import Dataset
from src.utils import DimensionError, NumericError, ParameterError, get_logger

logger = get_logger(__name__)


def _check_theta(theta: np.ndarray, data: Dataset) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size != data.p:
        raise DimensionError(
            f"Parameter vector has length {theta.size} but the design matrix has {data.p} columns"
        )
    return theta


def _require_finite(values: np.ndarray, what: str) -> np.ndarray:
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NumericError(f"{what} is not finite at sample index {int(bad[0])}")
    return values


def power_iteration_lambda_max(X: np.ndarray, iterations: Optional[int] = None) -> float:
    """
    Estimate lambda_max(X'X / n) by power iteration from the all-ones direction.

    Args:
        X: n x p design matrix
        iterations: Number of iterations (settings.power_iterations by default)

    Returns:
        Rayleigh-quotient estimate of the largest eigenvalue
    """
    iterations = iterations or get_settings().power_iterations
    n, p = X.shape
    v = np.ones(p) / np.sqrt(p)
    for _ in range(iterations):
        w = X.T @ (X @ v) / n
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
    return float(v @ (X.T @ (X @ v)) / n)


class Cumulant(ABC):
    """Cumulant function b of an exponential family, with b'."""

    name: str = ""
    # sup b'' (None when unbounded)
    curvature_bound: Optional[float] = None

    @abstractmethod
    def value(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def derivative(self, x: np.ndarray) -> np.ndarray:
        ...


class LogisticCumulant(Cumulant):
    """b(x) = log(1 + e^x), evaluated without overflow for large |x|."""

    name = "logistic"
    curvature_bound = 0.25

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.logaddexp(0.0, x)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        return expit(x)


def squared_error_value(theta: np.ndarray, data: Dataset) -> float:
    theta = _check_theta(theta, data)
    residual = data.y - data.X @ theta
    return float(residual @ residual) / (2 * data.n)


def squared_error_gradient(theta: np.ndarray, data: Dataset) -> np.ndarray:
    """X'(X theta - y) / n."""
    theta = _check_theta(theta, data)
    return data.X.T @ (data.X @ theta - data.y) / data.n


def glm_value(theta: np.ndarray, data: Dataset, cumulant: Cumulant) -> float:
    theta = _check_theta(theta, data)
    eta = data.X @ theta
    b = _require_finite(cumulant.value(eta), f"Cumulant {cumulant.name} value")
    return float(np.mean(b - data.y * eta))


def glm_gradient(theta: np.ndarray, data: Dataset, cumulant: Cumulant) -> np.ndarray:
    """(1/n) sum_i (b'(x_i' theta) - y_i) x_i."""
    theta = _check_theta(theta, data)
    eta = data.X @ theta
    b_prime = _require_finite(cumulant.derivative(eta), f"Cumulant {cumulant.name} derivative")
    return data.X.T @ (b_prime - data.y) / data.n


class LossModel(ABC):
    """
    Value/gradient contract used by the PGD engine.

    ``smoothness(data)`` returns the smoothness constant L that sets the
    default step size 1/L; an explicit ``smoothness_L`` overrides the estimate.
    """

    name: str = ""

    def __init__(self, smoothness_L: Optional[float] = None):
        if smoothness_L is not None and not smoothness_L > 0:
            raise ParameterError(f"Smoothness constant must be positive, got {smoothness_L}")
        self.smoothness_L = smoothness_L

    @abstractmethod
    def value(self, theta: np.ndarray, data: Dataset) -> float:
        ...

    @abstractmethod
    def gradient(self, theta: np.ndarray, data: Dataset) -> np.ndarray:
        ...

    @abstractmethod
    def estimate_smoothness(self, data: Dataset) -> float:
        ...

    def smoothness(self, data: Dataset) -> float:
        if self.smoothness_L is not None:
            return self.smoothness_L
        L = self.estimate_smoothness(data)
        if not L > 0:
            raise NumericError(f"Estimated smoothness constant {L!r} is not positive")
        logger.debug(f"{self.name} loss smoothness estimate L={L:.6g}")
        return L


class SquaredErrorLoss(LossModel):
    name = "linear"

    def value(self, theta: np.ndarray, data: Dataset) -> float:
        return squared_error_value(theta, data)

    def gradient(self, theta: np.ndarray, data: Dataset) -> np.ndarray:
        return squared_error_gradient(theta, data)

    def estimate_smoothness(self, data: Dataset) -> float:
        return power_iteration_lambda_max(data.X)


class GlmLoss(LossModel):
    """
    GLM negative log-likelihood.

    The logistic cumulant has no global strong-convexity constant; the
    curvature lower bound only holds over bounded regions.
    """

    def __init__(self, cumulant: Cumulant, smoothness_L: Optional[float] = None):
        super().__init__(smoothness_L)
        self.cumulant = cumulant
        self.name = cumulant.name

    def value(self, theta: np.ndarray, data: Dataset) -> float:
        return glm_value(theta, data, self.cumulant)

    def gradient(self, theta: np.ndarray, data: Dataset) -> np.ndarray:
        return glm_gradient(theta, data, self.cumulant)

    def estimate_smoothness(self, data: Dataset) -> float:
        if self.cumulant.curvature_bound is None:
            raise ParameterError(
                f"Cumulant {self.cumulant.name} has unbounded curvature; supply smoothness_L"
            )
        return self.cumulant.curvature_bound * power_iteration_lambda_max(data.X)


LOSS_NAMES = ("linear", "logistic")


def get_loss(name: str, smoothness_L: Optional[float] = None) -> LossModel:
    """Loss by CLI name: 'linear' or 'logistic'."""
    if name == "linear":
        return SquaredErrorLoss(smoothness_L)
    if name == "logistic":
        return GlmLoss(LogisticCumulant(), smoothness_L)
    raise ParameterError(f"Unknown loss {name!r}; expected one of {list(LOSS_NAMES)}")
