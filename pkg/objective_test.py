#!/usr/bin/env python3

""" Test the objective, its cache, and its cost ledger """

# Standard library imports
import threading

# 3rd party imports
import numpy as np
import pytest

# Local imports
from coldspray.config import ImagingConfig, ObjectiveConfig, SceneConfig
from coldspray.design import BoundPolicy, DesignBounds, DesignPoint, clamp_or_reject
from coldspray.error import BoundsError
from coldspray.imaging import MeasurementResult
from coldspray.objective import EVALUATION_CSV_HEADER, ImpactObjective, ImpactProblem
from coldspray.objective import Provenance, analytic_flattening, analytic_measure
from coldspray.objective import build_measure

DESIGN = DesignPoint(v=8.0, r=15.0, theta=0.0)

class CountingMeasure:
    """ Fixed measurement that counts its calls. """

    def __init__(self, s_i: int = 700, s_m: int = 1000):
        self.s_i = s_i
        self.s_m = s_m
        self.calls: list[tuple[DesignPoint, int]] = []
        self.lock = threading.Lock()

    def __call__(self, design: DesignPoint, seed: int) -> MeasurementResult:
        with self.lock:
            self.calls.append((design, seed))
        return MeasurementResult(S_i=self.s_i, S_m=self.s_m, mu=self.s_m / self.s_i,
            frame_of_max=1.0)

def test_value_is_area_ratio():
    """ Test c = S_i / S_m and one t_p per simulation. """
    objective = ImpactObjective(ObjectiveConfig(), CountingMeasure())
    value = objective.evaluate(DESIGN, 0)
    assert value.c == pytest.approx(0.7)
    assert value.eval_cost == 1
    assert value.provenance == Provenance.SIMULATED
    assert objective.tp_count == 1

def test_cache_costs_nothing():
    """ Test repeating a design is served from the cache. """
    measure = CountingMeasure()
    objective = ImpactObjective(ObjectiveConfig(), measure)
    first = objective.evaluate(DESIGN, 0)
    second = objective.evaluate(DesignPoint(v=8.0 + 1e-9, r=15.0, theta=0.0), 0)
    assert second.c == first.c
    assert second.eval_cost == 0
    assert second.provenance == Provenance.CACHED
    assert len(measure.calls) == 1
    assert objective.tp_count == 1

    # Another seed is another simulation.
    objective.evaluate(DESIGN, 1)
    assert objective.tp_count == 2

def test_batch_duplicates_charged_once():
    """ Test a batch with repeats simulates each design once. """
    measure = CountingMeasure()
    objective = ImpactObjective(ObjectiveConfig(), measure)
    other = DesignPoint(v=5.0, r=12.0, theta=10.0)
    values = objective.evaluate_many([DESIGN, other, DESIGN], 0)
    assert [v.eval_cost for v in values] == [1, 1, 0]
    assert objective.tp_count == 2
    assert [call[0] for call in measure.calls] == [DESIGN, other]

def test_parallel_batch_matches_serial():
    """ Test threaded evaluation gives the same values, costs, and ledger order. """
    designs = [DesignPoint(v=3.0 + k, r=10.0 + k, theta=2.0 * k) for k in range(8)]
    serial = ImpactObjective(ObjectiveConfig(), analytic_measure(ImagingConfig()))
    parallel = ImpactObjective(ObjectiveConfig(), analytic_measure(ImagingConfig()))
    expected = [v.c for v in serial.evaluate_many(designs, 0, workers=1)]
    actual = [v.c for v in parallel.evaluate_many(designs, 0, workers=4)]
    assert actual == expected
    assert parallel.tp_count == 8
    assert parallel.ledger_rows() == serial.ledger_rows()

def test_penalty_without_splat():
    """ Test S_m = 0 gives the configured penalty and a flag. """
    objective = ImpactObjective(ObjectiveConfig(penalty=12.5), CountingMeasure(s_m=0))
    value = objective.evaluate(DESIGN, 0)
    assert value.c == 12.5
    assert value.penalized
    assert objective.tp_count == 1

def test_out_of_bounds_rejected():
    """ Test the objective itself never evaluates outside the bounds. """
    measure = CountingMeasure()
    objective = ImpactObjective(ObjectiveConfig(), measure)
    with pytest.raises(BoundsError):
        objective.evaluate(DesignPoint(v=13.0, r=15.0, theta=0.0), 0)
    assert not measure.calls
    assert objective.tp_count == 0

def test_clamp_policy():
    """ Test clamping projects each coordinate onto its interval. """
    bounds = DesignBounds()
    clamped = clamp_or_reject(DesignPoint(v=20.0, r=5.0, theta=15.0), bounds, BoundPolicy.CLAMP)
    assert clamped == DesignPoint(v=12.0, r=10.0, theta=15.0)
    assert clamp_or_reject(DESIGN, bounds) is DESIGN

def test_seeds_averaged():
    """ Test seeds_per_eval runs consecutive seeds and averages c. """
    measure = CountingMeasure()
    objective = ImpactObjective(ObjectiveConfig(seeds_per_eval=3), measure)
    value = objective.evaluate(DESIGN, 10)
    assert [call[1] for call in measure.calls] == [10, 11, 12]
    assert value.eval_cost == 3
    assert value.c == pytest.approx(0.7)
    assert objective.tp_count == 3

def test_ledger_rows():
    """ Test the evaluation ledger lists each simulation once. """
    objective = ImpactObjective(ObjectiveConfig(), CountingMeasure())
    objective.evaluate(DESIGN, 0)
    objective.evaluate(DESIGN, 0)
    rows = objective.ledger_rows()
    assert rows[0] == EVALUATION_CSV_HEADER
    assert rows[1] == '0,8.0,15.0,0.0,0,700,1000,' + repr(1000 / 700) + ',' + \
        repr(0.7) + ',0,simulated'
    assert len(rows) == 2

def test_analytic_measure():
    """ Test the analytic stand-in gives c close to its closed form. """
    objective = ImpactObjective(ObjectiveConfig(), analytic_measure(ImagingConfig()))
    value = objective.evaluate(DESIGN, 0)
    assert value.c == pytest.approx(analytic_flattening(DESIGN), rel=1e-3)
    assert analytic_flattening(DesignPoint(v=12.0, r=15.0, theta=0.0)) < \
        analytic_flattening(DesignPoint(v=3.0, r=15.0, theta=0.0))

def test_problem_clamps_proposals():
    """ Test the optimizer adapter clamps points and reports cost. """
    objective = ImpactObjective(ObjectiveConfig(), analytic_measure(ImagingConfig()))
    problem = ImpactProblem(objective, seed=0)
    values = problem.evaluate(np.array([[8.0, 15.0, 0.0], [100.0, 15.0, 0.0]]))
    assert values.shape == (2,)
    assert values[1] == pytest.approx(objective.evaluate(DesignPoint(v=12.0, r=15.0,
        theta=0.0), 0).c)
    assert problem.cost == 2
    assert list(problem.lower) == [3.0, 10.0, 0.0]
    assert list(problem.upper) == [12.0, 20.0, 30.0]

def test_problem_reject_policy():
    """ Test the reject policy surfaces out-of-bounds proposals. """
    objective = ImpactObjective(ObjectiveConfig(), analytic_measure(ImagingConfig()))
    problem = ImpactProblem(objective, seed=0, policy=BoundPolicy.REJECT)
    with pytest.raises(BoundsError):
        problem.evaluate(np.array([[8.0, 25.0, 0.0]]))

@pytest.mark.slow
def test_faster_impacts_flatten_more():
    """ Test c falls as the impact speed rises at desk scale. """
    config = ObjectiveConfig()
    objective = ImpactObjective(config, build_measure(SceneConfig(), ImagingConfig(), config))
    designs = [DesignPoint(v=v, r=15.0, theta=0.0) for v in (4.0, 8.0, 12.0)]
    values = objective.evaluate_many(designs, 0, workers=3)
    assert objective.tp_count == 3
    assert not any(value.penalized for value in values)
    assert values[0].c > values[1].c > values[2].c
