import numpy as np
import pytest

from workloadtk.classifiers.forest import (ForestParams,
                                           ForestModel,
                                           LabeledInstance,
                                           balanced_bootstrap,
                                           train_forest,
                                           classify_window,
                                           classify_transition,
                                           evaluate)
from workloadtk.windowing import AnalyticWindow, to_analytic_window, rate_transform
from workloadtk.exceptions import (EmptyTrainingSet,
                                   DimensionMismatch,
                                   InvalidRecord)

from conftest import sampled_windows


PARAMS = ForestParams(n_trees=15, max_depth=6, min_leaf=2)


def _blobs(seed, per_class=40):
    rng = np.random.default_rng(seed)
    centers = {1: [0.0, 0.0, 0.0, 0.0], 2: [10.0, 0.0, 5.0, 0.0], 4: [0.0, 10.0, 0.0, 5.0]}
    rows = []
    for label, center in centers.items():
        for x in rng.normal(center, 1.0, size=(per_class, 4)):
            rows.append(LabeledInstance(label, x))
    return rows


def test_forest_separates_workloads():
    model = train_forest(_blobs(1), PARAMS, seed=3)

    assert model.classes == (1, 2, 4)
    assert model.params.features_per_split == 2
    assert model.oob_accuracy >= 0.95

    metrics = evaluate(model, _blobs(2, per_class=20))
    assert metrics['accuracy'] >= 0.95
    assert metrics['confusion']['labels'] == [1, 2, 4]

    label, confidence = classify_window(model, AnalyticWindow(0, (10.0, 0.0, 5.0, 0.0)))
    assert label == 2
    assert 0.5 < confidence <= 1.0


def test_forest_is_deterministic_and_persists(tmp_path):
    data = _blobs(5)
    a = train_forest(data, PARAMS, seed=11)
    b = train_forest(data, PARAMS, seed=11)
    assert a.to_record() == b.to_record()

    model_file = str(tmp_path / 'model.json')
    a.save(model_file)
    loaded = ForestModel.load(model_file)

    point = np.array([5.0, 5.0, 2.0, 2.0])
    assert list(loaded.votes(point)) == list(a.votes(point))
    assert loaded.classes == a.classes


def test_forest_rejects_bad_input():
    with pytest.raises(EmptyTrainingSet):
        train_forest([LabeledInstance(1, np.zeros(3))])

    with pytest.raises(DimensionMismatch):
        train_forest([LabeledInstance(1, np.zeros(3)), LabeledInstance(2, np.zeros(4))])

    model = train_forest(_blobs(1, per_class=5), PARAMS)
    with pytest.raises(DimensionMismatch):
        model.predict(np.zeros(3))


def test_forest_record_version():
    record = train_forest(_blobs(1, per_class=5), PARAMS).to_record()
    record['version'] = 99

    with pytest.raises(InvalidRecord):
        ForestModel.from_record(record)


def test_single_class_forest_always_predicts_it():
    data = [LabeledInstance(7, x) for x in np.random.default_rng(0).normal(0.0, 1.0, size=(10, 2))]

    model = train_forest(data, PARAMS)

    assert model.predict(np.array([100.0, -100.0])) == (7, 1.0)


def test_balanced_bootstrap_draws_each_class_equally():
    y = np.array([0] * 20 + [1] * 200 + [2] * 5)
    sample = balanced_bootstrap(y, np.random.default_rng(4))

    assert len(sample) == 3 * 75
    assert list(np.bincount(y[sample])) == [75, 75, 75]


def test_large_class_does_not_take_over_a_small_one():
    rng = np.random.default_rng(8)
    small = [LabeledInstance(1, x) for x in rng.normal([0.0, 0.0, 0.0], 0.5, size=(20, 3))]
    large = [LabeledInstance(3, x) for x in rng.normal([3.0, 3.0, 3.0], 2.0, size=(200, 3))]

    model = train_forest(small + large, PARAMS, seed=2)

    held_out = rng.normal([0.0, 0.0, 0.0], 0.25, size=(50, 3))
    assert all(model.predict(x)[0] == 1 for x in held_out)


def test_labels_are_invariant_to_positive_feature_scaling():
    scale = np.array([2.0, 0.5, 4.0, 0.25])
    data = _blobs(6)
    scaled = [LabeledInstance(d.label, d.features * scale) for d in data]

    a = train_forest(data, PARAMS, seed=9)
    b = train_forest(scaled, PARAMS, seed=9)

    points = np.random.default_rng(10).uniform(-3.0, 13.0, size=(200, 4))
    assert [a.predict(x)[0] for x in points] == [b.predict(x * scale)[0] for x in points]


def _step_transitions(centers, trials, seed):
    """Flattened rate windows around a step between each ordered pair of centers."""

    rows = []
    label = 0
    for i, src in enumerate(centers):
        for j, dst in enumerate(centers):
            if i == j:
                continue
            label += 1
            for k in range(trials):
                windows = sampled_windows([src, src, dst, dst], seed=seed * 1000 + label * 100 + k)
                analytic = [to_analytic_window(w) for w in windows]
                rates = [rate_transform(p, c) for p, c in zip(analytic, analytic[1:])]
                rows.append(LabeledInstance(label, np.concatenate([r.deltas for r in rates])))
    return rows


def test_transition_classifier_on_held_out_steps():
    centers = [[10.0, 50.0, 5.0, 100.0], [40.0, 20.0, 25.0, 60.0], [70.0, 35.0, 10.0, 80.0]]

    model = train_forest(_step_transitions(centers, 30, seed=1), PARAMS, seed=5)
    held_out = _step_transitions(centers, 15, seed=2)

    correct = sum(1 for d in held_out if classify_transition(model, d.features)[0] == d.label)
    assert correct / float(len(held_out)) >= 0.9
