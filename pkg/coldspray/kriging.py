#!/usr/bin/env python3

""" This file contains the ordinary Kriging model and expected improvement. """

# Copyright 2024 Cold Loop contributors
#
# This file is part of Cold Loop.
#
# Cold Loop is free software: you can redistribute it and/or modify it under
# the terms of the GNU General Public License as published by the Free Software
# Foundation, either version 3 of the License, or (at your option) any later
# version.
#
# Cold Loop is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR
# A PARTICULAR PURPOSE. See the GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along with
# Cold Loop. If not, see <https://www.gnu.org/licenses/>.

# Standard library imports
from dataclasses import dataclass
import logging
import math

# 3rd party imports
import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.stats import norm

# Local imports
from .error import ColdSprayError

# Correlation weight search: starts and bounds in log10.
START_RANGE: tuple[float, float] = (-2.0, 2.0)
SEARCH_RANGE: tuple[float, float] = (-3.0, 3.0)
MAX_NUGGET: float = 1e-4
VARIANCE_FLOOR: float = 1e-300
FAILED_LIKELIHOOD: float = 1e10

def correlation(x1: np.ndarray, x2: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """ Gaussian correlation exp(-sum_k theta_k (x1_k - x2_k)^2) between all row pairs. """
    diff = x1[:, None, :] - x2[None, :, :]
    return np.exp(-np.einsum('ijk,k->ij', diff * diff, theta))

@dataclass
class KrigingModel:
    """ Ordinary Kriging model with a constant trend on unit-cube inputs.

    The nugget is part of the kernel: it is added wherever two inputs
    coincide, so the model interpolates its training data.
    """

    X: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    beta: float
    sigma2: float
    nugget: float
    factor: tuple[np.ndarray, bool]
    alpha: np.ndarray
    log_likelihood: float

    @property
    def lengthscales(self) -> np.ndarray:
        """ Equivalent Gaussian lengthscales, 1 / sqrt(2 theta). """
        return 1.0 / np.sqrt(2.0 * self.theta)

    def cross_correlation(self, x: np.ndarray) -> np.ndarray:
        """ Correlation between x rows and training rows, nugget included on exact matches. """
        r = correlation(x, self.X, self.theta)
        same = np.all(x[:, None, :] == self.X[None, :, :], axis=2)
        return r + self.nugget * same

def concentrated_likelihood(X: np.ndarray, y: np.ndarray, theta: np.ndarray,
    nugget: float) -> tuple[float, dict] | None:
    """ Concentrated log-likelihood and the closed-form trend and variance.

    Returns None when the correlation matrix is not positive definite.
    """

    n: int = len(y)
    R = correlation(X, X, theta) + nugget * np.eye(n)
    try:
        factor = cho_factor(R, lower=True)
    except LinAlgError:
        return None
    ones = np.ones(n)
    r_inv_ones = cho_solve(factor, ones)
    r_inv_y = cho_solve(factor, y)
    beta = float(ones @ r_inv_y / (ones @ r_inv_ones))
    residual = y - beta
    alpha = cho_solve(factor, residual)
    sigma2 = float(residual @ alpha / n)
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    log_likelihood = -0.5 * (n * math.log(max(sigma2, VARIANCE_FLOOR)) + log_det)
    return (log_likelihood, {'factor': factor, 'beta': beta, 'sigma2': max(sigma2, 0.0),
        'alpha': alpha})

def fit_kriging(X: np.ndarray, y: np.ndarray, restarts: int = 10, nugget: float = 1e-8,
    seed: int = 0) -> KrigingModel:
    """ Fit correlation weights by multistart maximization of the concentrated likelihood. """

    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    (n, dims) = X.shape
    if len(y) != n:
        raise ColdSprayError(f'Kriging needs one output per input row, got {n} rows, {len(y)} outputs')
    if n < dims + 2:
        raise ColdSprayError(f'Kriging needs at least {dims + 2} points in {dims} dimensions, got {n}')
    if len(np.unique(X, axis=0)) != n:
        raise ColdSprayError('Kriging training inputs contain duplicate rows.')

    def negative(log_theta: np.ndarray) -> float:
        fit = concentrated_likelihood(X, y, 10.0 ** log_theta, nugget)
        return FAILED_LIKELIHOOD if fit is None else -fit[0]

    # Multistart bounded search in log10 space.
    rng = np.random.default_rng(seed)
    bounds = [SEARCH_RANGE] * dims
    best_log_theta: np.ndarray | None = None
    best_value: float = math.inf
    for restart in range(restarts):
        start = rng.uniform(START_RANGE[0], START_RANGE[1], dims)
        outcome = minimize(negative, start, method='L-BFGS-B', bounds=bounds)
        logging.debug("Kriging restart %d: -log L = %.6g at log10 theta %s",
            restart, outcome.fun, np.round(outcome.x, 3).tolist())
        if outcome.fun < best_value:
            (best_value, best_log_theta) = (float(outcome.fun), np.array(outcome.x))
    assert best_log_theta is not None
    theta = 10.0 ** best_log_theta

    # Factorize, escalating the nugget if needed.
    current = nugget
    while current <= MAX_NUGGET * (1.0 + 1e-12):
        fit = concentrated_likelihood(X, y, theta, current)
        if fit is not None:
            (log_likelihood, parts) = fit
            return KrigingModel(X=X.copy(), y=y.copy(), theta=theta, beta=parts['beta'],
                sigma2=parts['sigma2'], nugget=current, factor=parts['factor'],
                alpha=parts['alpha'], log_likelihood=log_likelihood)
        current *= 10.0
    raise ColdSprayError(f'Kriging correlation matrix is not positive definite even with ' + \
        f'nugget {MAX_NUGGET}.')

def predict(model: KrigingModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """ Kriging mean and standard deviation at each row of x.

    The variance is sigma2 (1 - r' R^-1 r), so it vanishes at training inputs
    and returns to sigma2 far from the data.
    """

    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    r = model.cross_correlation(x)
    mean = model.beta + r @ model.alpha
    explained = np.einsum('ij,ji->i', r, cho_solve(model.factor, r.T))
    variance = model.sigma2 * np.clip(1.0 - explained, 0.0, None)
    return (mean, np.sqrt(variance))

def improvement(mean: np.ndarray, std: np.ndarray, f_min: float) -> np.ndarray:
    """ Expected improvement of a Gaussian prediction below f_min; 0 where std is 0. """
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    result = np.zeros(np.broadcast(mean, std).shape)
    positive = np.broadcast_to(std > 0.0, result.shape)
    gain = np.broadcast_to(f_min - mean, result.shape)[positive]
    spread = np.broadcast_to(std, result.shape)[positive]
    z = gain / spread
    result[positive] = gain * norm.cdf(z) + spread * norm.pdf(z)
    return np.maximum(result, 0.0)

def expected_improvement(model: KrigingModel, x: np.ndarray, f_min: float) -> np.ndarray:
    """ Expected improvement at each row of x. """
    (mean, std) = predict(model, x)
    return improvement(mean, std, f_min)
