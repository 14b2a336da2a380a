"""
Convergence diagnostics from the tree-PGD error bound.

Given curvature constants alpha <= L of the loss, the projected-gradient
bound Phi(S') and the run's knobs, the bound reads

    ||theta_tau - theta*|| <= Gamma^tau ||theta*|| + Lambda

with gamma, Gamma, Lambda computed below. Everything here is a report: it
never gates a run. Phi helpers and rates are "up to constants" (constant 1
unless one is passed).
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from src.models import PgdConfig
from src.utils import ParameterError, get_logger

logger = get_logger(__name__)

NOT_CONTRACTIVE = "not contractive"
CONTRACTIVE = "contractive"


@dataclass(frozen=True)
class TheoryDiagnostics:
    """gamma, Gamma and Lambda of the error bound; None when the bound does not contract."""

    alpha: float
    L: float
    s_star: int
    S: int
    d_max: int
    S_prime: float
    Phi: float
    delta: float
    p: int
    gamma: Optional[float]
    Gamma: Optional[float]
    Lambda: Optional[float]
    status: str

    @property
    def contractive(self) -> bool:
        return self.status == CONTRACTIVE

    def error_bound(self, tau: int, theta_star_norm: float) -> Optional[float]:
        """Gamma^tau * ||theta*|| + Lambda, or None when not contractive."""
        if not self.contractive:
            return None
        return self.Gamma**tau * theta_star_norm + self.Lambda


def sparsity_growth(S_prime: float, p: int) -> float:
    """g(S') = S' log(1 + p / S')."""
    return S_prime * math.log1p(p / S_prime)


def linear_model_constants(lambda1: float, lambda_p: float) -> Tuple[float, float]:
    """(alpha, L) = (lambda_p / 2, 3 lambda_1 / 2) for the squared-error loss."""
    return lambda_p / 2, 3 * lambda1 / 2


def glm_constants(alpha_b: float, L_b: float, lambda1: float, lambda_p: float) -> Tuple[float, float]:
    """(alpha, L) = (alpha_b lambda_p / 2, 3 L_b lambda_1 / 2) for a GLM loss."""
    return alpha_b * lambda_p / 2, 3 * L_b * lambda1 / 2


def cpgb_linear(sigma: float, lambda1: float, n: int, S_prime: float, p: int, constant: float = 1.0) -> float:
    """Phi(S') = C sigma sqrt(lambda_1 g(S') / n) for the linear model."""
    return constant * sigma * math.sqrt(lambda1 * sparsity_growth(S_prime, p) / n)


def cpgb_glm(lambda1: float, n: int, S_prime: float, p: int, beta: float, constant: float = 1.0) -> float:
    """
    Phi(S') for a GLM whose residual tails decay like exp(-zeta^beta).

    beta in (1, 2]: C sqrt(lambda_1 / n) g(S')^(1/beta)
    beta = 1:       C log(n) sqrt(lambda_1 / n) g(S')
    """
    if not 1 <= beta <= 2:
        raise ParameterError(f"Tail exponent beta must lie in [1, 2], got {beta}")
    g = sparsity_growth(S_prime, p)
    scale = constant * math.sqrt(lambda1 / n)
    if beta == 1:
        return scale * math.log(n) * g
    return scale * g ** (1 / beta)


def corollary1_rate(sigma: float, lambda1: float, lambda_p: float, s_star: int, n: int, p: int) -> float:
    """Squared-error rate sigma^2 lambda_1^3 / lambda_p^4 * (s*/n) log(1 + p/s*) of the linear model."""
    return sigma**2 * lambda1**3 / lambda_p**4 * (s_star / n) * math.log1p(p / s_star)


def diagnostics(
    config: PgdConfig,
    alpha: float,
    L: float,
    Phi_S_prime: Optional[float],
    s_star: int,
    p: int,
    delta: Optional[float] = None,
    sigma: Optional[float] = None,
    lambda1: Optional[float] = None,
    n: Optional[int] = None,
) -> TheoryDiagnostics:
    """
    Evaluate gamma, Gamma and Lambda for a run configuration.

    Args:
        config: Run configuration (S, d_max and, if present, the grid step)
        alpha: Restricted strong-convexity constant
        L: Restricted smoothness constant, alpha <= L
        Phi_S_prime: Projected-gradient bound at S'; when None it is computed
            with cpgb_linear from sigma, lambda1 and n
        s_star: Gradient sparsity of the truth
        p: Number of vertices
        delta: Grid step; defaults to the config's grid step

    Returns:
        TheoryDiagnostics
    """
    if not 0 < alpha <= L:
        raise ParameterError(f"Need 0 < alpha <= L, got alpha={alpha}, L={L}")

    S = config.sparsity
    d_max = config.tree_policy.d_max
    root_S = math.sqrt(S)
    S_prime = S + 2 * s_star + max(root_S, d_max)

    if delta is None:
        if config.grid is None:
            raise ParameterError("Grid step delta is required when the config has no grid")
        delta = config.grid.step

    if Phi_S_prime is None:
        if sigma is None or lambda1 is None or n is None:
            raise ParameterError("Phi(S') needs either an explicit value or sigma, lambda1 and n")
        Phi_S_prime = cpgb_linear(sigma, lambda1, n, S_prime, p)

    common = dict(
        alpha=alpha, L=L, s_star=s_star, S=S, d_max=d_max,
        S_prime=S_prime, Phi=Phi_S_prime, delta=delta, p=p,
    )

    denominator = S - 2 * s_star - root_S
    if denominator <= 0:
        logger.warning(f"S={S} does not exceed 2s* + sqrt(S) for s*={s_star}; bound is {NOT_CONTRACTIVE}")
        return TheoryDiagnostics(gamma=None, Gamma=None, Lambda=None, status=NOT_CONTRACTIVE, **common)

    gamma = math.sqrt(((d_max - 1) * (2 * s_star + root_S + 1) + 1) / denominator)
    Gamma = (1 + gamma) * math.sqrt(1 - alpha / L)
    if Gamma >= 1:
        logger.warning(f"Gamma={Gamma:.4f} >= 1; bound is {NOT_CONTRACTIVE}")
        return TheoryDiagnostics(gamma=gamma, Gamma=Gamma, Lambda=None, status=NOT_CONTRACTIVE, **common)

    Lambda = (4 * (1 + gamma) / alpha * Phi_S_prime + delta * math.sqrt(p)) / (1 - Gamma)
    return TheoryDiagnostics(gamma=gamma, Gamma=Gamma, Lambda=Lambda, status=CONTRACTIVE, **common)
