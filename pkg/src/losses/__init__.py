"""Losses and convergence diagnostics."""

from .loss_models import (
    Cumulant,
    LogisticCumulant,
    LossModel,
    SquaredErrorLoss,
    GlmLoss,
    LOSS_NAMES,
    get_loss,
    glm_gradient,
    glm_value,
    power_iteration_lambda_max,
    squared_error_gradient,
    squared_error_value,
)
from .diagnostics import (
    TheoryDiagnostics,
    NOT_CONTRACTIVE,
    diagnostics,
    sparsity_growth,
    linear_model_constants,
    glm_constants,
    cpgb_linear,
    cpgb_glm,
    corollary1_rate,
)

__all__ = [
    "Cumulant",
    "LogisticCumulant",
    "LossModel",
    "SquaredErrorLoss",
    "GlmLoss",
    "LOSS_NAMES",
    "get_loss",
    "glm_gradient",
    "glm_value",
    "power_iteration_lambda_max",
    "squared_error_gradient",
    "squared_error_value",
    "TheoryDiagnostics",
    "NOT_CONTRACTIVE",
    "diagnostics",
    "sparsity_growth",
    "linear_model_constants",
    "glm_constants",
    "cpgb_linear",
    "cpgb_glm",
    "corollary1_rate",
]
