#!/usr/bin/env python3

""" Test the back-propagation network surrogate """

# Standard library imports
import json

# 3rd party imports
import numpy as np
import pytest

# Local imports
from coldspray.config import SurrogateConfig
from coldspray.design import DesignBounds, DesignPoint
from coldspray.error import BoundsError, ColdSprayError
from coldspray.objective import Provenance
from coldspray.surrogate_nn import TRAINING_CSV_HEADER, as_objective, flat_gradient, forward
from coldspray.surrogate_nn import init_network, load_network, numeric_gradient, regression
from coldspray.surrogate_nn import save_network, split_samples, train

BOUNDS = DesignBounds()

def design_network(seed: int = 0, layers=(3, 5, 5, 5, 1)):
    """ Untrained network over the design box with c in [0.3, 1.2]. """
    return init_network(layers, BOUNDS.lower, BOUNDS.upper, 0.3, 1.2, np.random.default_rng(seed))

def test_default_architecture():
    """ Test the default network is 3-5-5-5-1 with 86 parameters. """
    layers = SurrogateConfig().layers
    assert layers == (3, 5, 5, 5, 1)
    net = design_network(layers=layers)
    assert len(net.parameters()) == 86
    assert [w.shape for w in net.weights] == [(5, 3), (5, 5), (5, 5), (1, 5)]
    assert np.all(np.abs(net.parameters()) <= 0.5)

def test_gradient_matches_finite_differences():
    """ Test back-propagation against central differences. """
    net = design_network(1)
    rng = np.random.default_rng(2)
    z = rng.uniform(-1.0, 1.0, (7, 3))
    t = rng.uniform(-1.0, 1.0, 7)
    assert np.allclose(flat_gradient(net, z, t), numeric_gradient(net, z, t), rtol=1e-5, atol=1e-8)

def test_normalization_inverse():
    """ Test input and output scaling invert each other. """
    net = design_network()
    x = np.array([[3.0, 10.0, 0.0], [12.0, 20.0, 30.0], [7.5, 15.0, 15.0]])
    z = net.normalize_inputs(x)
    assert np.allclose(z[0], -1.0)
    assert np.allclose(z[1], 1.0)
    assert np.allclose(z[2], 0.0)
    assert np.allclose(net.denormalize_inputs(z), x)
    assert np.allclose(net.denormalize_outputs(net.normalize_outputs(np.array([0.3, 0.75]))),
        [0.3, 0.75])

def test_linear_fit():
    """ Test a small network learns y = x. """
    X = np.linspace(0.0, 1.0, 20)[:, None]
    hyper = SurrogateConfig(layers=(1, 5, 1), epochs=1000, val_fraction=0.0, batch_size=1)
    (net, report) = train(X, X[:, 0], hyper, seed=0)
    assert report.best_epoch >= 1
    assert not report.val_mse
    assert np.max(np.abs(forward(net, X) - X[:, 0])) < 0.05

def test_xor():
    """ Test a hidden layer learns XOR for at least one of a few seeds. """
    X = np.tile(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]), (3, 1))
    y = np.tile(np.array([0.0, 1.0, 1.0, 0.0]), 3)
    hyper = SurrogateConfig(layers=(2, 8, 1), learning_rate=0.02, epochs=3000,
        val_fraction=0.0, batch_size=1)
    errors = []
    for seed in range(5):
        (net, _) = train(X, y, hyper, seed)
        errors.append(float(np.max(np.abs(forward(net, X[:4]) - y[:4]))))
    assert min(errors) < 0.1

def test_best_epoch_by_validation():
    """ Test the selected epoch has the lowest validation error. """
    rng = np.random.default_rng(0)
    X = rng.uniform(BOUNDS.lower, BOUNDS.upper, (40, 3))
    y = 0.5 + 0.01 * X[:, 0] + 0.02 * X[:, 1]
    hyper = SurrogateConfig(epochs=50)
    (net, report) = train(X, y, hyper, seed=1, x_range=(BOUNDS.lower, BOUNDS.upper))
    assert len(report.train_mse) == 50
    assert len(report.val_mse) == 50
    assert report.best_epoch == int(np.argmin(report.val_mse)) + 1
    assert list(net.x_lower) == [3.0, 10.0, 0.0]
    rows = report.csv_rows()
    assert rows[0] == TRAINING_CSV_HEADER
    assert len(rows) == 51

def test_train_needs_samples():
    """ Test fewer than ten samples are refused. """
    with pytest.raises(ColdSprayError):
        train(np.zeros((9, 3)), np.arange(9.0), SurrogateConfig(), 0)

def test_training_diverges():
    """ Test a huge learning rate is reported. """
    X = np.linspace(0.0, 1.0, 20)[:, None]
    hyper = SurrogateConfig(layers=(1, 5, 1), learning_rate=1e6, momentum=0.0, epochs=50,
        val_fraction=0.0)
    with pytest.raises(ColdSprayError) as exc_info:
        train(X, X[:, 0] ** 2, hyper, 0)
    assert 'learning rate' in str(exc_info.value)

def test_split_samples():
    """ Test a split is disjoint and covers every sample. """
    (train_index, val_index) = split_samples(10, 0.2, np.random.default_rng(0))
    assert len(val_index) == 2
    assert sorted(np.concatenate([train_index, val_index])) == list(range(10))
    (_, none) = split_samples(10, 0.0, np.random.default_rng(0))
    assert len(none) == 0

def test_regression():
    """ Test Pearson R for a perfect line, a constant, and constant targets. """
    targets = np.array([0.4, 0.6, 0.8, 1.0])
    assert regression(targets, 2.0 * targets + 1.0).r == pytest.approx(1.0)
    constant = regression(targets, np.full(4, 0.7))
    assert constant.r == 0.0
    assert constant.mse == pytest.approx(np.mean((targets - 0.7) ** 2))
    with pytest.raises(ColdSprayError):
        regression(np.full(4, 0.5), targets)

def test_save_and_load(tmp_path):
    """ Test a saved network predicts exactly as before. """
    net = design_network(4)
    filename = str(tmp_path / 'network.json')
    save_network(net, filename)
    loaded = load_network(filename)
    x = np.array([[5.0, 12.0, 3.0], [11.0, 19.0, 28.0]])
    assert loaded.layers == net.layers
    assert np.array_equal(forward(loaded, x), forward(net, x))

def test_load_bad_network(tmp_path):
    """ Test malformed network files are reported. """
    filename = tmp_path / 'network.json'
    filename.write_text('{"layers": [3, 1]}', encoding='utf-8')
    with pytest.raises(ColdSprayError) as exc_info:
        load_network(str(filename))
    assert 'not a network file' in str(exc_info.value)
    with pytest.raises(ColdSprayError):
        load_network(str(tmp_path / 'missing.json'))

def test_load_network_shape_mismatch(tmp_path):
    """ Test a weight matrix that does not match the layer sizes is refused. """
    filename = tmp_path / 'network.json'
    save_network(design_network(6, layers=(3, 2, 1)), str(filename))
    data = json.loads(filename.read_text(encoding='utf-8'))
    data['weights'][0] = data['weights'][0][:1]
    filename.write_text(json.dumps(data), encoding='utf-8')
    with pytest.raises(ColdSprayError) as exc_info:
        load_network(str(filename))
    assert 'layer 1 weights and biases do not match 3 inputs and 2 outputs' in str(exc_info.value)

def test_surrogate_objective():
    """ Test predictions cost nothing and match the network. """
    net = design_network(5)
    objective = as_objective(net, BOUNDS)
    design = DesignPoint(v=8.0, r=15.0, theta=10.0)
    value = objective.evaluate(design, 0)
    assert value.eval_cost == 0
    assert value.provenance == Provenance.SURROGATE_PREDICTED
    assert value.c == pytest.approx(float(forward(net, design.as_array())[0]))
    many = objective.evaluate_many([design, DesignPoint(v=4.0, r=11.0, theta=2.0)], 0)
    assert many[0].c == pytest.approx(value.c)
    assert objective.tp_count == 0
    assert objective.predictions == 3

def test_surrogate_objective_bounds():
    """ Test the surrogate refuses designs outside the box and wrong shapes. """
    objective = as_objective(design_network(), BOUNDS)
    with pytest.raises(BoundsError):
        objective.evaluate(DesignPoint(v=2.0, r=15.0, theta=0.0), 0)
    with pytest.raises(ColdSprayError):
        as_objective(design_network(layers=(3, 4, 2)), BOUNDS)
