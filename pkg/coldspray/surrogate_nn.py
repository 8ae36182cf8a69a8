#!/usr/bin/env python3

""" This file contains the back-propagation neural network surrogate. """

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
from dataclasses import dataclass, field
import json
import logging
import threading
from typing import Sequence

# 3rd party imports
import numpy as np
# pylint: disable=no-name-in-module
from pydantic import BaseModel, ValidationError, model_validator

# Local imports
from .config import SurrogateConfig
from .design import BoundPolicy, DesignBounds, DesignPoint, clamp_or_reject
from .error import ColdSprayError
from .objective import ObjectiveValue, Provenance
from .util import format_float

TRAINING_CSV_HEADER: str = 'epoch,train_mse,val_mse'
LOG_EVERY_EPOCHS: int = 100

@dataclass
class MLPNetwork:
    """ Fully connected network: tanh hidden layers, identity output.

    Inputs and outputs are mapped affinely to [-1, 1] using the stored
    ranges before the first layer and after the last.
    """

    layers: tuple[int, ...]
    weights: list[np.ndarray]   # (fan_out, fan_in) per layer
    biases: list[np.ndarray]
    x_lower: np.ndarray
    x_upper: np.ndarray
    y_lower: float
    y_upper: float

    def normalize_inputs(self, x: np.ndarray) -> np.ndarray:
        """ Physical inputs to [-1, 1]. """
        return 2.0 * (x - self.x_lower) / span(self.x_lower, self.x_upper) - 1.0

    def denormalize_inputs(self, z: np.ndarray) -> np.ndarray:
        """ [-1, 1] back to physical inputs. """
        return self.x_lower + 0.5 * (z + 1.0) * span(self.x_lower, self.x_upper)

    def normalize_outputs(self, y: np.ndarray) -> np.ndarray:
        """ Objective units to [-1, 1]. """
        return 2.0 * (y - self.y_lower) / span(self.y_lower, self.y_upper) - 1.0

    def denormalize_outputs(self, z: np.ndarray) -> np.ndarray:
        """ [-1, 1] back to objective units. """
        return self.y_lower + 0.5 * (z + 1.0) * span(self.y_lower, self.y_upper)

    def parameters(self) -> np.ndarray:
        """ All weights then all biases, flattened. """
        return np.concatenate([w.ravel() for w in self.weights] + [b.ravel() for b in self.biases])

    def with_parameters(self, flat: np.ndarray) -> 'MLPNetwork':
        """ Copy with parameters taken from a flat vector in parameters() order. """
        weights: list[np.ndarray] = []
        biases: list[np.ndarray] = []
        offset = 0
        for w in self.weights:
            weights.append(flat[offset:offset + w.size].reshape(w.shape).copy())
            offset += w.size
        for b in self.biases:
            biases.append(flat[offset:offset + b.size].copy())
            offset += b.size
        return MLPNetwork(self.layers, weights, biases, self.x_lower.copy(), self.x_upper.copy(),
            self.y_lower, self.y_upper)

def span(lower, upper):
    """ upper - lower, with zero widths replaced by one. """
    width = np.asarray(upper, dtype=np.float64) - np.asarray(lower, dtype=np.float64)
    return np.where(width == 0.0, 1.0, width)

def init_network(layers: Sequence[int], x_lower: Sequence[float], x_upper: Sequence[float],
    y_lower: float, y_upper: float, rng: np.random.Generator, init_scale: float = 0.5) -> MLPNetwork:
    """ Network with weights and biases uniform in [-init_scale, init_scale]. """

    layers = tuple(int(size) for size in layers)
    if len(layers) < 2 or min(layers) < 1:
        raise ColdSprayError(f'Network needs at least two positive layer sizes, got {layers}')
    if len(x_lower) != layers[0] or len(x_upper) != layers[0]:
        raise ColdSprayError(f'Input ranges have {len(x_lower)} features, network expects {layers[0]}')
    weights = [rng.uniform(-init_scale, init_scale, (fan_out, fan_in))
        for (fan_in, fan_out) in zip(layers[:-1], layers[1:])]
    biases = [rng.uniform(-init_scale, init_scale, fan_out) for fan_out in layers[1:]]
    return MLPNetwork(layers, weights, biases, np.asarray(x_lower, dtype=np.float64),
        np.asarray(x_upper, dtype=np.float64), float(y_lower), float(y_upper))

def activations(net: MLPNetwork, z: np.ndarray) -> list[np.ndarray]:
    """ Layer outputs for normalized inputs z, input layer first. """
    outputs = [z]
    last = len(net.weights) - 1
    for (k, (w, b)) in enumerate(zip(net.weights, net.biases)):
        pre = outputs[-1] @ w.T + b
        outputs.append(pre if k == last else np.tanh(pre))
    return outputs

def forward(net: MLPNetwork, x: np.ndarray) -> np.ndarray:
    """ Predictions in objective units for each row of x. Single-output networks return a vector. """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    out = net.denormalize_outputs(activations(net, net.normalize_inputs(x))[-1])
    return out[:, 0] if out.shape[1] == 1 else out

def loss_and_gradient(net: MLPNetwork, z: np.ndarray,
    t: np.ndarray) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """ Mean squared error in normalized units and its gradient by back-propagation. """

    t = t.reshape(len(z), -1)
    outputs = activations(net, z)
    error = outputs[-1] - t
    loss = float(np.mean(error ** 2))

    # Walk back from the output layer.
    delta = 2.0 * error / error.size
    grad_w: list[np.ndarray] = [np.empty(0)] * len(net.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(net.biases)
    for k in reversed(range(len(net.weights))):
        grad_w[k] = delta.T @ outputs[k]
        grad_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ net.weights[k]) * (1.0 - outputs[k] ** 2)
    return (loss, grad_w, grad_b)

def flat_gradient(net: MLPNetwork, z: np.ndarray, t: np.ndarray) -> np.ndarray:
    """ Back-propagated gradient in parameters() order. """
    (_, grad_w, grad_b) = loss_and_gradient(net, z, t)
    return np.concatenate([g.ravel() for g in grad_w] + [g.ravel() for g in grad_b])

def numeric_gradient(net: MLPNetwork, z: np.ndarray, t: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """ Central-difference gradient in parameters() order. """
    flat = net.parameters()
    gradient = np.empty_like(flat)
    for k in range(len(flat)):
        step = np.zeros_like(flat)
        step[k] = h
        (plus, _, _) = loss_and_gradient(net.with_parameters(flat + step), z, t)
        (minus, _, _) = loss_and_gradient(net.with_parameters(flat - step), z, t)
        gradient[k] = (plus - minus) / (2.0 * h)
    return gradient

@dataclass
class Regression:
    """ Agreement between predictions and targets. """
    r: float
    mse: float
    targets: np.ndarray
    predictions: np.ndarray

@dataclass
class TrainReport:
    """ Per-epoch errors in objective units and the selected epoch. """

    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    best_epoch: int = 0
    train_regression: Regression | None = None
    test_regression: Regression | None = None

    def csv_rows(self) -> list[str]:
        """ Training history as CSV rows, header first. """
        rows = [TRAINING_CSV_HEADER]
        for (epoch, train_mse) in enumerate(self.train_mse):
            val = format_float(self.val_mse[epoch]) if self.val_mse else ''
            rows.append(f'{epoch + 1},{format_float(train_mse)},{val}')
        return rows

    def to_csv(self, filename: str) -> None:
        """ Write the training history CSV. """
        try:
            with open(filename, "w", encoding="utf-8") as csv_file:
                csv_file.write('\n'.join(self.csv_rows()) + '\n')
        except OSError as ex:
            raise ColdSprayError(f'Unable to write {filename}: {str(ex)}') from ex

def split_samples(n: int, val_fraction: float,
    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """ Random (train, validation) index split; at least one validation sample if any are asked for. """
    order = rng.permutation(n)
    n_val = int(round(val_fraction * n))
    if val_fraction > 0.0:
        n_val = min(max(n_val, 1), n - 1)
    return (np.sort(order[n_val:]), np.sort(order[:n_val]))

def train(X: np.ndarray, y: np.ndarray, hyper: SurrogateConfig, seed: int,
    x_range: tuple[Sequence[float], Sequence[float]] | None = None) -> tuple[MLPNetwork, TrainReport]:
    """ Gradient descent with momentum on the MSE; returns the network at the best validation epoch.

    Input normalization uses x_range when given (the design box), else the
    sample range. Output normalization uses the training target range.
    """

    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    n: int = len(X)
    if n < 10:
        raise ColdSprayError(f'Training needs at least 10 samples, got {n}')
    if len(y) != n:
        raise ColdSprayError(f'Training has {n} inputs but {len(y)} targets')

    rng = np.random.default_rng(seed)
    (train_index, val_index) = split_samples(n, hyper.val_fraction, rng)
    (lower, upper) = x_range if x_range else (X.min(axis=0), X.max(axis=0))
    net = init_network(hyper.layers, lower, upper, float(y[train_index].min()),
        float(y[train_index].max()), rng, hyper.init_scale)
    z = net.normalize_inputs(X)
    t = net.normalize_outputs(y)
    scale = float(span(net.y_lower, net.y_upper)) ** 2 / 4.0

    flat = net.parameters()
    velocity = np.zeros_like(flat)
    report = TrainReport()
    best_score = np.inf
    best_flat = flat.copy()
    for epoch in range(hyper.epochs):
        # One pass over the shuffled training set.
        order = rng.permutation(train_index)
        for start in range(0, len(order), hyper.batch_size):
            batch = order[start:start + hyper.batch_size]
            gradient = flat_gradient(net, z[batch], t[batch])
            velocity = hyper.momentum * velocity - hyper.learning_rate * gradient
            flat = flat + velocity
            net = net.with_parameters(flat)

        (train_loss, _, _) = loss_and_gradient(net, z[train_index], t[train_index])
        if not np.isfinite(train_loss):
            raise ColdSprayError(f'Training loss is not finite at epoch {epoch + 1}; ' + \
                f'try a learning rate below {hyper.learning_rate}')
        report.train_mse.append(train_loss * scale)
        score = report.train_mse[-1]
        if len(val_index) > 0:
            (val_loss, _, _) = loss_and_gradient(net, z[val_index], t[val_index])
            report.val_mse.append(val_loss * scale)
            score = report.val_mse[-1]
        if score < best_score:
            (best_score, best_flat, report.best_epoch) = (score, flat.copy(), epoch + 1)
        if (epoch + 1) % LOG_EVERY_EPOCHS == 0:
            logging.info("Epoch %d: train MSE %.6g, validation MSE %s", epoch + 1,
                report.train_mse[-1], f'{report.val_mse[-1]:.6g}' if report.val_mse else '-')

    net = net.with_parameters(best_flat)
    logging.info("Training finished; best epoch %d with MSE %.6g", report.best_epoch, best_score)
    return (net, report)

def evaluate_regression(net: MLPNetwork, X: np.ndarray, y: np.ndarray) -> Regression:
    """ Pearson R and MSE between network predictions and targets. """
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(y) < 2:
        raise ColdSprayError(f'Regression needs at least 2 samples, got {len(y)}')
    return regression(y, forward(net, X))

def regression(targets: np.ndarray, predictions: np.ndarray) -> Regression:
    """ Pearson R and MSE of predictions against targets. """
    if np.ptp(targets) == 0.0:
        raise ColdSprayError('Targets have zero variance; regression R is undefined.')
    mse = float(np.mean((predictions - targets) ** 2))
    if np.ptp(predictions) == 0.0:
        logging.warning("Predictions are constant; reporting R = 0")
        return Regression(0.0, mse, targets, predictions)
    r = float(np.corrcoef(predictions, targets)[0, 1])
    return Regression(r, mse, targets, predictions)

class SurrogateObjective:
    """ Network predictions behind the objective interface. Costs no t_p. """

    def __init__(self, net: MLPNetwork, bounds: DesignBounds):
        if net.layers[0] != 3 or net.layers[-1] != 1:
            raise ColdSprayError(f'Surrogate network must map 3 inputs to 1 output, got {net.layers}')
        self.net = net
        self.bounds = bounds
        self.lock = threading.Lock()
        self.predictions: int = 0

    @property
    def tp_count(self) -> int:
        """ Always zero. """
        return 0

    def evaluate(self, design: DesignPoint, seed: int) -> ObjectiveValue:
        """ Predicted c at design. """
        design = clamp_or_reject(design, self.bounds, BoundPolicy.REJECT)
        c = float(forward(self.net, design.as_array())[0])
        with self.lock:
            self.predictions += 1
        return ObjectiveValue(design, seed, c, None, 0, Provenance.SURROGATE_PREDICTED)

    def evaluate_many(self, designs: Sequence[DesignPoint], seed: int,
        workers: int = 1) -> list[ObjectiveValue]:
        """ Predicted c at each design in one forward pass. workers is ignored. """
        designs = [clamp_or_reject(d, self.bounds, BoundPolicy.REJECT) for d in designs]
        if not designs:
            return []
        predictions = forward(self.net, np.array([d.as_array() for d in designs]))
        with self.lock:
            self.predictions += len(designs)
        return [ObjectiveValue(d, seed, float(c), None, 0, Provenance.SURROGATE_PREDICTED)
            for (d, c) in zip(designs, predictions)]

def as_objective(net: MLPNetwork, bounds: DesignBounds) -> SurrogateObjective:
    """ Wrap a trained network as an objective. """
    return SurrogateObjective(net, bounds)

class NetworkFile(BaseModel):
    """ On-disk form of an MLPNetwork. """

    layers: list[int]
    weights: list[list[list[float]]]
    biases: list[list[float]]
    x_lower: list[float]
    x_upper: list[float]
    y_lower: float
    y_upper: float

    @model_validator(mode="after")
    def check_shapes(self) -> "NetworkFile":
        """ Weight, bias, and input range shapes must follow the layer sizes. """
        if len(self.layers) < 2 or min(self.layers) < 1:
            raise ValueError(f'need at least two positive layer sizes, got {self.layers}')
        if len(self.weights) != len(self.layers) - 1 or len(self.biases) != len(self.layers) - 1:
            raise ValueError(f'layers {self.layers} need {len(self.layers) - 1} weight ' + \
                f'matrices, got {len(self.weights)}')
        for (k, (w, b)) in enumerate(zip(self.weights, self.biases)):
            (fan_in, fan_out) = (self.layers[k], self.layers[k + 1])
            if len(w) != fan_out or any(len(row) != fan_in for row in w) or len(b) != fan_out:
                raise ValueError(f'layer {k + 1} weights and biases do not match ' + \
                    f'{fan_in} inputs and {fan_out} outputs')
        if len(self.x_lower) != self.layers[0] or len(self.x_upper) != self.layers[0]:
            raise ValueError(f'input ranges do not match {self.layers[0]} inputs')
        return self

    @classmethod
    def from_network(cls, net: MLPNetwork) -> "NetworkFile":
        """ File form of net. """
        return cls(layers=list(net.layers), weights=[w.tolist() for w in net.weights],
            biases=[b.tolist() for b in net.biases], x_lower=net.x_lower.tolist(),
            x_upper=net.x_upper.tolist(), y_lower=net.y_lower, y_upper=net.y_upper)

    def to_network(self) -> MLPNetwork:
        """ Network described by this file. """
        return MLPNetwork(tuple(self.layers),
            [np.asarray(w, dtype=np.float64) for w in self.weights],
            [np.asarray(b, dtype=np.float64) for b in self.biases],
            np.asarray(self.x_lower, dtype=np.float64), np.asarray(self.x_upper, dtype=np.float64),
            self.y_lower, self.y_upper)

def save_network(net: MLPNetwork, filename: str) -> None:
    """ Write a network as JSON; floats round-trip exactly. """
    try:
        with open(filename, "w", encoding="utf-8") as network_file:
            network_file.write(NetworkFile.from_network(net).model_dump_json(indent=1) + '\n')
    except OSError as ex:
        raise ColdSprayError(f'Unable to write {filename}: {str(ex)}') from ex

def load_network(filename: str) -> MLPNetwork:
    """ Read a network written by save_network. """
    try:
        with open(filename, "r", encoding="utf-8") as network_file:
            data = json.load(network_file)
        return NetworkFile.model_validate(data).to_network()
    except OSError as ex:
        raise ColdSprayError(f'Unable to read {filename}: {str(ex)}') from ex
    except (ValueError, ValidationError) as ex:
        raise ColdSprayError(f'{filename} is not a network file: {str(ex)}') from ex
