import numpy as np
import pytest

from workloadtk.windowing import ObservationWindow, SampleStats, window_from_values
from workloadtk.knowledge_base import ConfigSpace, KnowledgeBase
from workloadtk.simulator.scenario import bundled_scenarios, load_scenario


NUM_FEATURES = 4


def make_window(index, means, stds=None, n=20, window_length=10.0):
    """Observation window with the given per-feature statistics."""

    means = np.asarray(means, dtype=float)
    if stds is None:
        stds = np.ones(len(means))
    stats = tuple(SampleStats(float(m), float(s), n, float(m - 3 * s), float(m + 3 * s)) for m, s in zip(means, stds))
    return ObservationWindow(index, index * window_length, (index + 1) * window_length, stats)


def sampled_windows(means_per_window, noise=1.0, samples=20, seed=0, start=0):
    """Observation windows built from Gaussian samples around each mean vector."""

    rng = np.random.default_rng(seed)
    windows = []
    for i, means in enumerate(means_per_window):
        means = np.asarray(means, dtype=float)
        values = means + noise * rng.standard_normal((samples, len(means)))
        t = start + i
        windows.append(window_from_values(values, t, (t * 10.0, (t + 1) * 10.0)))
    return windows


def plateau_means(centers, lengths):
    means = []
    for center, length in zip(centers, lengths):
        means.extend([center] * length)
    return means


@pytest.fixture
def space():
    return ConfigSpace([('map_slots', [1, 2, 4, 8, 16]),
                        ('io_sort_mb', [50, 100, 200, 400, 800]),
                        ('reduce_tasks', [1, 2, 4, 8, 16])],
                       {'map_slots': 1, 'io_sort_mb': 50, 'reduce_tasks': 1})


@pytest.fixture
def kb(tmp_path):
    return KnowledgeBase(str(tmp_path / 'kb'))


@pytest.fixture
def scenario_file():
    return bundled_scenarios()


@pytest.fixture
def load_bundled():
    return lambda name: load_scenario(bundled_scenarios()[name])
