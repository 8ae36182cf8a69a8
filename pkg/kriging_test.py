#!/usr/bin/env python3

""" Test the Kriging model and expected improvement """

# 3rd party imports
import numpy as np
import pytest

# Local imports
from coldspray.error import ColdSprayError
from coldspray.kriging import KrigingModel, concentrated_likelihood, correlation
from coldspray.kriging import expected_improvement, fit_kriging, improvement, predict
from coldspray.sampling import latin_hypercube

def naive_correlation(x1: np.ndarray, x2: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """ Correlation by explicit loops. """
    result = np.empty((len(x1), len(x2)))
    for i, a in enumerate(x1):
        for j, b in enumerate(x2):
            result[i, j] = np.exp(-np.sum(theta * (a - b) ** 2))
    return result

def sine_model():
    """ Kriging fit of sin(2 pi x) on 8 points. """
    X = np.linspace(0.0, 1.0, 8)[:, None]
    return (X, fit_kriging(X, np.sin(2.0 * np.pi * X[:, 0]), restarts=5, seed=0))

def test_correlation_matches_loops():
    """ Test the vectorized correlation against explicit loops. """
    rng = np.random.default_rng(0)
    (x1, x2) = (rng.random((5, 3)), rng.random((4, 3)))
    theta = np.array([0.5, 2.0, 10.0])
    assert np.allclose(correlation(x1, x2, theta), naive_correlation(x1, x2, theta))

def test_interpolates_training_data():
    """ Test the mean passes through the data with near-zero spread there. """
    (X, model) = sine_model()
    (mean, std) = predict(model, X)
    assert np.allclose(mean, np.sin(2.0 * np.pi * X[:, 0]), atol=1e-6)
    assert np.all(std < 1e-3)

def test_predicts_between_points():
    """ Test the model tracks the sine between training points. """
    (_, model) = sine_model()
    x = np.linspace(0.05, 0.95, 10)[:, None]
    (mean, std) = predict(model, x)
    assert np.allclose(mean, np.sin(2.0 * np.pi * x[:, 0]), atol=0.1)
    assert np.all(std >= 0.0)

def test_improvement_closed_form():
    """ Test EI at zero gap with unit spread is 1 / sqrt(2 pi). """
    assert improvement(np.array([0.0]), np.array([1.0]), 0.0)[0] == \
        pytest.approx(0.398942, abs=1e-6)

def test_improvement_zero_spread():
    """ Test EI is zero where the spread is zero. """
    assert list(improvement(np.array([-1.0, 1.0]), np.array([0.0, 0.0]), 0.0)) == [0.0, 0.0]

def test_improvement_nonnegative():
    """ Test EI is never negative and grows with the gap. """
    gains = improvement(np.array([2.0, 1.0, 0.0, -1.0]), np.full(4, 0.5), 0.0)
    assert np.all(gains >= 0.0)
    assert np.all(np.diff(gains) > 0.0)

def test_expected_improvement_vanishes_at_data():
    """ Test EI at a sampled point is essentially zero. """
    (X, model) = sine_model()
    f_min = float(model.y.min())
    at_data = expected_improvement(model, X, f_min)
    assert np.all(at_data < 1e-4)
    assert float(expected_improvement(model, np.array([[0.8]]), f_min)[0]) >= 0.0

def test_three_dimensional_fit():
    """ Test a 3-D quadratic is fitted with finite weights inside the search range. """
    X = latin_hypercube(20, 3, 4)
    y = np.sum((X - 0.4) ** 2, axis=1)
    model = fit_kriging(X, y, restarts=3, seed=1)
    assert np.all(np.isfinite(model.theta))
    assert np.all((model.theta >= 1e-3 * (1 - 1e-9)) & (model.theta <= 1e3 * (1 + 1e-9)))
    assert np.all(model.lengthscales > 0.0)
    (mean, _) = predict(model, np.array([[0.4, 0.4, 0.4]]))
    assert mean[0] == pytest.approx(0.0, abs=0.1)

def test_fit_errors():
    """ Test too few points, duplicates, and mismatched outputs. """
    with pytest.raises(ColdSprayError) as exc_info:
        fit_kriging(np.zeros((3, 3)), np.zeros(3))
    assert 'at least 5 points' in str(exc_info.value)
    X = np.array([[0.1], [0.1], [0.5], [0.9]])
    with pytest.raises(ColdSprayError) as exc_info:
        fit_kriging(X, np.arange(4.0))
    assert 'duplicate' in str(exc_info.value)
    with pytest.raises(ColdSprayError):
        fit_kriging(np.linspace(0, 1, 5)[:, None], np.zeros(4))

def fixed_model(X: np.ndarray, y: np.ndarray, theta: np.ndarray,
    nugget: float = 1e-8) -> KrigingModel:
    """ Kriging model at given correlation weights, without the likelihood search. """
    fit = concentrated_likelihood(X, y, theta, nugget)
    assert fit is not None
    (log_likelihood, parts) = fit
    return KrigingModel(X=X, y=y, theta=theta, beta=parts['beta'], sigma2=parts['sigma2'],
        nugget=nugget, factor=parts['factor'], alpha=parts['alpha'],
        log_likelihood=log_likelihood)

def test_predict_matches_dense_inverse():
    """ Test mean and variance against formulas evaluated with an explicit inverse. """
    rng = np.random.default_rng(7)
    for _ in range(20):
        (X, y) = (rng.random((5, 3)), rng.normal(size=5))
        theta = rng.uniform(1.0, 10.0, 3)
        model = fixed_model(X, y, theta)
        R_inv = np.linalg.inv(correlation(X, X, theta) + model.nugget * np.eye(5))
        ones = np.ones(5)
        beta = (ones @ R_inv @ y) / (ones @ R_inv @ ones)
        sigma2 = (y - beta) @ R_inv @ (y - beta) / 5
        assert model.beta == pytest.approx(beta, abs=1e-8)
        assert model.sigma2 == pytest.approx(sigma2, abs=1e-8)

        x = np.vstack([rng.random((6, 3)), X[:2]])
        r = model.cross_correlation(x)
        mean = beta + r @ R_inv @ (y - beta)
        variance = np.clip(sigma2 * (1.0 - np.einsum('ij,jk,ik->i', r, R_inv, r)), 0.0, None)
        (got_mean, got_std) = predict(model, x)
        assert np.allclose(got_mean, mean, rtol=0.0, atol=1e-8)
        assert np.allclose(got_std ** 2, variance, rtol=0.0, atol=1e-8)
