import argparse

import pytest

from workloadtk.config import LoopSettings
from workloadtk.default_values import DefaultValues
from workloadtk.exceptions import InvalidScenario


def _flags(**values):
    names = ('windows_len', 'alpha', 'eps', 'epsilon_drift', 'minpts',
             'batch_len', 'budget_global', 'budget_local', 'cpus')
    namespace = argparse.Namespace(**{name: None for name in names})
    for key, value in values.items():
        setattr(namespace, key, value)
    return namespace


def test_defaults():
    settings = LoopSettings.from_layers()

    assert settings.alpha == DefaultValues.ALPHA
    assert settings.batch_length == DefaultValues.BATCH_LENGTH
    assert settings.sync_tolerance == DefaultValues.SYNC_TOLERANCE_WINDOWS * DefaultValues.WINDOW_LENGTH
    assert 'cpus' not in settings.to_record()


def test_scenario_sections_then_flags(load_bundled):
    scenario = load_bundled('mixed_transitions')

    from_scenario = LoopSettings.from_layers(scenario)
    assert from_scenario.alpha == 1e-6
    assert from_scenario.batch_length == 100
    assert from_scenario.synthetic_instances == 50

    from_flags = LoopSettings.from_layers(scenario, _flags(alpha=0.01, minpts=3, cpus=2))
    assert from_flags.alpha == 0.01
    assert from_flags.min_pts == 3
    assert from_flags.cpus == 2
    assert from_flags.batch_length == 100


def test_derived_parameter_objects():
    settings = LoopSettings.from_layers(None, _flags(eps=0.8, epsilon_drift=2.0))

    params = settings.discovery_params()
    assert params.eps == 0.8
    assert params.epsilon_drift == 2.0
    assert params.policy == settings.change_policy()

    forest = settings.forest_params()
    assert (forest.n_trees, forest.max_depth, forest.min_leaf) == (DefaultValues.N_TREES,
                                                                   DefaultValues.MAX_DEPTH,
                                                                   DefaultValues.MIN_LEAF)


def test_unknown_scenario_setting(load_bundled):
    scenario = load_bundled('three_plateaus')
    scenario.settings['discovery'] = {'radius': 3.0}

    with pytest.raises(InvalidScenario):
        LoopSettings.from_layers(scenario)


@pytest.mark.parametrize('flags', [
    {'alpha': 1.5},
    {'eps': 0.0},
    {'minpts': 10, 'batch_len': 5},
    {'budget_global': 0},
    {'budget_local': -1},
    {'windows_len': -10.0},
    {'cpus': 0},
])
def test_invalid_settings(flags):
    with pytest.raises(InvalidScenario):
        LoopSettings.from_layers(None, _flags(**flags))


def test_uncastable_value(load_bundled):
    scenario = load_bundled('three_plateaus')
    scenario.settings['optimizer'] = {'budget_global': 'many'}

    with pytest.raises(InvalidScenario):
        LoopSettings.from_layers(scenario)


def test_rejecting_features_bounded_by_schema(load_bundled):
    scenario = load_bundled('three_plateaus')
    scenario.settings['detection'] = {'min_features_rejecting': scenario.schema.size + 1}

    with pytest.raises(InvalidScenario):
        LoopSettings.from_layers(scenario)

    scenario.settings['detection'] = {'min_features_rejecting': scenario.schema.size}
    assert LoopSettings.from_layers(scenario).min_features_rejecting == scenario.schema.size
