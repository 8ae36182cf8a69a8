#!/usr/bin/env python3

""" Convergence, training, and regression plots. """

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
import threading

# 3rd party imports
import matplotlib
matplotlib.use("Agg")
# pylint: disable=wrong-import-position
from matplotlib import pyplot

# Local imports
from .error import ColdSprayError
from .optimizers import OptimizationTrace
from .surrogate_nn import Regression, TrainReport

# pyplot keeps global state.
PLOT_LOCK = threading.Lock()

def save_figure(filename: str) -> None:
    """ Save and close the current figure. """
    try:
        pyplot.tight_layout() # Reduce margins.
        pyplot.savefig(filename, format="png")
    except OSError as ex:
        raise ColdSprayError(f'Unable to write {filename}: {str(ex)}') from ex
    finally:
        pyplot.close()

def plot_convergence(traces: list[OptimizationTrace], filename: str) -> None:
    """ Incumbent objective against iteration, one line per trace. """
    with PLOT_LOCK:
        pyplot.figure(figsize=(8, 5), dpi=300) # Configure plot size.
        for trace in traces:
            iterations = [r.iteration for r in trace.records]
            pyplot.plot(iterations, trace.best_values(), label=trace.algorithm.upper()) # Draw line graph.
            pyplot.scatter(iterations, trace.best_values(), s=10) # Add dots for each iteration.
        pyplot.xlabel('Iteration') # Set x-axis label.
        pyplot.ylabel('Objective c') # Set y-axis label.
        pyplot.legend()
        save_figure(filename)

def plot_training(report: TrainReport, filename: str) -> None:
    """ Training and validation MSE per epoch on a log scale, best epoch marked. """
    with PLOT_LOCK:
        pyplot.figure(figsize=(8, 5), dpi=300) # Configure plot size.
        epochs = list(range(1, len(report.train_mse) + 1))
        pyplot.semilogy(epochs, report.train_mse, label='Train')
        if report.val_mse:
            pyplot.semilogy(epochs, report.val_mse, label='Validation')
            pyplot.scatter([report.best_epoch], [report.val_mse[report.best_epoch - 1]],
                s=30, color='red', label=f'Best (epoch {report.best_epoch})')
        pyplot.xlabel('Epoch') # Set x-axis label.
        pyplot.ylabel('Mean squared error') # Set y-axis label.
        pyplot.legend()
        save_figure(filename)

def plot_regression(result: Regression, title: str, filename: str) -> None:
    """ Predictions against targets with the y = x line. """
    with PLOT_LOCK:
        pyplot.figure(figsize=(5, 5), dpi=300) # Configure plot size.
        pyplot.scatter(result.targets, result.predictions, s=6)
        low = float(min(result.targets.min(), result.predictions.min()))
        high = float(max(result.targets.max(), result.predictions.max()))
        pyplot.plot([low, high], [low, high], color='black', linewidth=1) # Draw y = x.
        pyplot.title(f'{title}: R = {result.r:.5f}')
        pyplot.xlabel('Target') # Set x-axis label.
        pyplot.ylabel('Output') # Set y-axis label.
        save_figure(filename)
