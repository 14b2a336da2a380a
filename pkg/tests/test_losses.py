"""Tests for loss values, gradients and smoothness estimates."""

import numpy as np
import pytest

from src.losses import (
    GlmLoss,
    LogisticCumulant,
    SquaredErrorLoss,
    get_loss,
    power_iteration_lambda_max,
)
from src.models import Dataset
from src.utils import DimensionError, NumericError, ParameterError


def central_difference(f, theta, h=1e-6):
    grad = np.empty_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        grad[k] = (f(theta + e) - f(theta - e)) / (2 * h)
    return grad


@pytest.fixture
def linear_data(rng):
    X = rng.standard_normal((40, 6))
    y = X @ rng.standard_normal(6) + 0.1 * rng.standard_normal(40)
    return Dataset(X=X, y=y)


@pytest.fixture
def logistic_data(rng):
    X = rng.standard_normal((60, 5))
    y = (rng.uniform(size=60) < 0.5).astype(float)
    return Dataset(X=X, y=y)


@pytest.mark.parametrize("loss_name", ["linear", "logistic"])
def test_gradient_matches_finite_differences(loss_name, rng, linear_data, logistic_data):
    data = linear_data if loss_name == "linear" else logistic_data
    loss = get_loss(loss_name)
    for _ in range(20):
        theta = rng.standard_normal(data.p)
        numeric = central_difference(lambda t: loss.value(t, data), theta)
        analytic = loss.gradient(theta, data)
        scale = max(1.0, float(np.linalg.norm(analytic)))
        assert np.linalg.norm(numeric - analytic) / scale <= 1e-5


def test_squared_error_gradient_is_affine(rng, linear_data):
    loss = SquaredErrorLoss()
    a, b = rng.standard_normal(6), rng.standard_normal(6)
    mid = loss.gradient(0.5 * (a + b), linear_data)
    assert np.allclose(mid, 0.5 * (loss.gradient(a, linear_data) + loss.gradient(b, linear_data)))


@pytest.mark.parametrize("loss_name", ["linear", "logistic"])
def test_losses_are_convex_along_segments(loss_name, rng, linear_data, logistic_data):
    data = linear_data if loss_name == "linear" else logistic_data
    loss = get_loss(loss_name)
    for _ in range(20):
        a, b = rng.standard_normal(data.p), rng.standard_normal(data.p)
        t = float(rng.uniform())
        mixed = loss.value(t * a + (1 - t) * b, data)
        assert mixed <= t * loss.value(a, data) + (1 - t) * loss.value(b, data) + 1e-12


def test_identity_design_example():
    data = Dataset(X=np.eye(3), y=np.array([1.0, 2.0, 3.0]))
    loss = SquaredErrorLoss()
    assert loss.value(np.zeros(3), data) == pytest.approx(14 / 6)
    assert loss.gradient(np.zeros(3), data).tolist() == pytest.approx([-1 / 3, -2 / 3, -1.0])
    assert loss.smoothness(data) == pytest.approx(1 / 3)


def test_logistic_gradient_at_zero(logistic_data):
    loss = GlmLoss(LogisticCumulant())
    expected = logistic_data.X.T @ (0.5 - logistic_data.y) / logistic_data.n
    assert np.allclose(loss.gradient(np.zeros(5), logistic_data), expected)
    assert loss.value(np.zeros(5), logistic_data) == pytest.approx(np.log(2.0))


def test_logistic_is_stable_for_large_margins():
    data = Dataset(X=np.array([[1.0], [1.0]]), y=np.array([1.0, 0.0]))
    loss = GlmLoss(LogisticCumulant())
    theta = np.array([800.0])
    assert np.isfinite(loss.value(theta, data))
    assert loss.gradient(theta, data).tolist() == pytest.approx([0.5])


def test_non_finite_design_raises_numeric_error():
    data = Dataset(X=np.array([[1.0], [np.nan]]), y=np.array([1.0, 0.0]))
    with pytest.raises(NumericError, match="sample index 1"):
        GlmLoss(LogisticCumulant()).gradient(np.array([1.0]), data)


def test_parameter_length_checked(linear_data):
    with pytest.raises(DimensionError, match="length 5"):
        SquaredErrorLoss().value(np.zeros(5), linear_data)


def test_power_iteration_matches_eigvalsh(rng):
    X = rng.standard_normal((80, 10))
    exact = float(np.linalg.eigvalsh(X.T @ X / 80).max())
    assert power_iteration_lambda_max(X, iterations=500) == pytest.approx(exact, rel=1e-6)


def test_logistic_smoothness_uses_quarter_curvature(rng):
    X = rng.standard_normal((50, 4))
    data = Dataset(X=X, y=np.zeros(50))
    linear_L = SquaredErrorLoss().smoothness(data)
    assert GlmLoss(LogisticCumulant()).smoothness(data) == pytest.approx(0.25 * linear_L)


def test_explicit_smoothness_overrides_estimate(linear_data):
    assert get_loss("linear", smoothness_L=7.5).smoothness(linear_data) == 7.5
    with pytest.raises(ParameterError):
        get_loss("linear", smoothness_L=0.0)


def test_unknown_loss_name():
    with pytest.raises(ParameterError, match="poisson"):
        get_loss("poisson")
