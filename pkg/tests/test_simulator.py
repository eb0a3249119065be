import os

import numpy as np
import pytest
import yaml

from workloadtk.simulator.scenario import (RuntimeModel,
                                           parse_scenario,
                                           load_scenario,
                                           bundled_scenarios,
                                           resolve_scenario)
from workloadtk.simulator.cluster import (ClusterSimulator,
                                          true_runtime,
                                          ground_truth_optimum,
                                          run)
from workloadtk.exceptions import InvalidScenario


BUNDLED = ('drift_pair', 'hybrid_pair', 'mixed_transitions', 'noiseless_plateau', 'repeat_daily', 'three_plateaus')


def _record(**overrides):
    record = {'version': 1,
              'name': 'small',
              'seed': 3,
              'features': ['cpu', 'mem'],
              'config_space': {'parameters': [{'name': 'slots', 'values': [1, 2, 4]},
                                              {'name': 'buffer', 'values': [10, 20]}],
                               'default': {'slots': 1, 'buffer': 10}},
              'classes': [{'name': 'a', 'mean': [10, 10], 'noise': 1.0,
                           'optimal': {'slots': 4, 'buffer': 20}, 'base_runtime': 50.0},
                          {'name': 'b', 'mean': [40, 10], 'noise': 1.0,
                           'optimal': {'slots': 1, 'buffer': 20}, 'base_runtime': 80.0, 'weights': 2.0}],
              'schedule': [{'class': 'a', 'windows': 5},
                           {'class': 'b', 'windows': 5, 'transition': 2}]}
    record.update(overrides)
    return record


def test_bundled_scenarios_load():
    scenarios = bundled_scenarios()
    assert tuple(sorted(scenarios)) == BUNDLED

    for name in BUNDLED:
        scenario = load_scenario(scenarios[name])
        assert scenario.name == name
        assert scenario.samples_per_window == 10

    assert resolve_scenario('three_plateaus') == scenarios['three_plateaus']
    assert resolve_scenario('no_such_scenario') == 'no_such_scenario'


def test_scenario_defaults():
    scenario = parse_scenario(_record())

    assert scenario.num_windows == 10
    assert scenario.rule_of_thumb.as_dict() == {'slots': 2, 'buffer': 10}
    assert scenario.truth_types() == ['a', 'b']
    assert scenario.classes['b'].runtime.weights == (2.0, 2.0)
    assert scenario.settings['detection'] == {}


@pytest.mark.parametrize('overrides', [
    {'version': 2},
    {'colour': 'blue'},
    {'schedule': []},
    {'schedule': [{'class': 'c', 'windows': 5}]},
    {'schedule': [{'class': 'a', 'windows': 2}]},
    {'schedule': [{'class': 'a', 'windows': 5, 'transition': 4}]},
    {'schedule': [{'hybrid': ['a', 'a'], 'windows': 5}]},
    {'schedule': [{'windows': 5}]},
    {'rule_of_thumb': {'slots': 3, 'buffer': 10}},
    {'classes': [{'name': 'a', 'mean': [10, 10], 'noise': 1.0, 'optimal': {'slots': 4, 'buffer': 20},
                  'base_runtime': 50.0, 'runtime_noise': 0.5}]},
    {'classes': [{'name': 'a', 'mean': [10], 'optimal': {'slots': 4, 'buffer': 20}, 'base_runtime': 50.0}]},
    {'classes': [{'name': 'a', 'mean': [10, 10], 'noise': 1.0, 'optimal': {'slots': 4, 'buffer': 20}, 'base_runtime': 50.0},
                 {'name': 'b', 'mean': [12, 10], 'noise': 1.0, 'optimal': {'slots': 4, 'buffer': 20}, 'base_runtime': 50.0}]},
    {'sample_interval': 10.0},
    {'detection': 0.05},
])
def test_invalid_scenarios(overrides):
    with pytest.raises(InvalidScenario):
        parse_scenario(_record(**overrides))


def test_load_scenario_errors(tmp_path):
    with pytest.raises(InvalidScenario):
        load_scenario(str(tmp_path / 'missing.yaml'))

    broken = tmp_path / 'broken.yaml'
    broken.write_text('schedule: [unclosed\n')
    with pytest.raises(InvalidScenario):
        load_scenario(str(broken))

    small = tmp_path / 'small.yaml'
    small.write_text(yaml.safe_dump(_record()))
    assert load_scenario(str(small)).name == 'small'


def test_runtime_model():
    model = RuntimeModel(100.0, (2, 0), (4.0, 1.0))

    assert model.expected((2, 0), (5, 5)) == 100.0
    assert model.expected((4, 1), (5, 5)) == pytest.approx(100.0 * (1 + 4.0 * 0.16) * (1 + 0.04))


def test_ground_truth_optimum(load_bundled):
    scenario = load_bundled('three_plateaus')
    space = scenario.space

    for name, cls in scenario.classes.items():
        config, runtime = ground_truth_optimum(cls.runtime, space)
        assert space.indices(config) == cls.runtime.optimal
        assert runtime == cls.runtime.base
        assert true_runtime(cls.runtime, space.default, space) >= runtime


def test_plan_ramps_between_segments(load_bundled):
    simulator = ClusterSimulator(load_bundled('three_plateaus'))
    plan = simulator.plan

    assert simulator.num_windows == 180
    assert [w.index for w in plan if w.in_transition] == [60, 61, 120, 121]
    assert [plan[t].truth_label for t in (0, 60, 179)] == [1, 2, 3]

    a = np.array(simulator.scenario.classes['wordcount'].mean)
    b = np.array(simulator.scenario.classes['terasort'].mean)
    assert np.allclose(plan[60].generators[0][0], (a + b) / 2.0)
    assert np.allclose(plan[61].generators[0][0], b)


def test_repeated_class_has_no_ramp(load_bundled):
    scenario = load_bundled('noiseless_plateau')
    scenario.repeat = 3

    simulator = ClusterSimulator(scenario)

    assert simulator.num_windows == 300
    assert not any(w.in_transition for w in simulator.plan)


def test_hybrid_and_drift_segments(load_bundled):
    hybrid = ClusterSimulator(load_bundled('hybrid_pair'))
    wp = hybrid.plan[150]
    assert wp.truth == 'wordcount+terasort'
    assert wp.truth_label == 3
    assert len(wp.generators) == 2
    assert wp.runtime.optimal == (2, 2, 4)
    assert wp.runtime.base == 125.0

    drift = ClusterSimulator(load_bundled('drift_pair'))
    wp = drift.plan[130]
    assert wp.truth == 'terasort'
    assert wp.generators[0][0][7] == pytest.approx(8.0)
    assert wp.runtime.optimal == (0, 0, 2)
    assert drift.plan[90].generators[0][0][7] == pytest.approx(6.5)


def test_windows_are_deterministic(load_bundled):
    scenario = load_bundled('three_plateaus')
    a = ClusterSimulator(scenario)
    b = ClusterSimulator(scenario)
    c = ClusterSimulator(scenario, seed=12)

    values_a, timestamps, sources = a.window_values(7)
    assert np.array_equal(values_a, b.window_values(7)[0])
    assert not np.array_equal(values_a, c.window_values(7)[0])

    assert values_a.shape == (20, 8)
    start, end = a.span(7)
    assert all(start <= ts < end for ts in timestamps)
    assert sources[:4] == ['agent-0', 'agent-1', 'agent-0', 'agent-1']

    o = a.observation_window(7)
    assert o.index == 7
    assert o.means == pytest.approx(values_a.mean(axis=0))


def test_rm_stub_step_measures_jobs(load_bundled):
    scenario = load_bundled('three_plateaus')
    simulator = ClusterSimulator(scenario)
    optimum = scenario.space.config_at((4, 4, 4))

    probes = []

    def choose(t, objective):
        probes.append(objective(scenario.space.default))
        return optimum

    job = simulator.rm_stub_step(10, choose)

    assert job.config == optimum
    assert job.runtime == job.expected == 100.0
    assert job.runtime_default == probes[0]
    assert job.runtime_rule_of_thumb < job.runtime_default


def test_simulate_writes_trace(tmp_path, load_bundled):
    simulator, trace = run(load_bundled('hybrid_pair'), seed=1)

    assert len(trace.jobs) == 180
    assert trace.transition_windows == {60, 120}
    assert trace.truth_labels()[179] == 3

    output_dir = str(tmp_path / 'sim')
    trace.write(output_dir, simulator)

    for filename in ('raw_samples.csv', 'truth.csv', 'jobs.csv'):
        assert os.path.exists(os.path.join(output_dir, filename))

    with open(os.path.join(output_dir, 'raw_samples.csv')) as f:
        assert sum(1 for _ in f) == 180 * 20
    with open(os.path.join(output_dir, 'truth.csv')) as f:
        assert f.readline() == 'window,truth,truth_label,in_transition\n'
