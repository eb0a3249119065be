import os

import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.common import read_sparse
from workloadtk.windowing import AnalyticWindow, RateWindow
from workloadtk.knowledge_base import WorkloadDB, WorkloadRecord
from workloadtk.discovery import characterize
from workloadtk.training_sets import (TransitionLabels,
                                      label_sequence,
                                      flatten_rates,
                                      transition_rows,
                                      predictor_rows,
                                      build_training_sets,
                                      write_training_sets)

from conftest import make_window


def _streams(num_windows=10, num_features=2):
    analytic = [AnalyticWindow(i, tuple(float(i * 10 + f) for f in range(num_features))) for i in range(num_windows)]
    rates = [RateWindow(i, tuple(float(i * 100 + f) for f in range(num_features))) for i in range(1, num_windows)]
    return analytic, rates


def _db(labels):
    db = WorkloadDB()
    for label in labels:
        db.upsert(WorkloadRecord(label, characterize([make_window(i, [float(label), 1.0]) for i in range(3)])))
    return db


def test_transition_labels_are_ordered_pairs():
    registry = TransitionLabels()

    assert registry.label(1, 2) == 1
    assert registry.label(2, 1) == 2
    assert registry.label(1, 2) == 1
    assert registry.pair(2) == (2, 1)
    assert registry.pair(7) is None
    assert len(registry) == 2


def test_transition_labels_persist(kb):
    TransitionLabels(kb).label(3, 1)

    reopened = TransitionLabels(kb)
    assert reopened.label(3, 1) == 1
    assert reopened.label(1, 3) == 2


def test_label_sequence_carries_previous_label():
    assert label_sequence(range(7), {1: 5, 2: 5, 5: 7}) == [5, 5, 5, 5, 7, 7]
    assert label_sequence(range(3), {}) == []


def test_flatten_rates():
    _analytic, rates = _streams()
    rate_by_index = {r.index: r for r in rates}

    assert list(flatten_rates(rate_by_index, 4, 2)) == [300.0, 301.0, 400.0, 401.0]
    assert flatten_rates(rate_by_index, 1, 2) is None


def test_transition_rows_cover_untagged_gap():
    analytic, rates = _streams()
    window_labels = {0: 1, 1: 1, 2: 1, 3: 1, 5: 2, 6: 2, 7: 2, 8: 2, 9: 2}
    registry = TransitionLabels()

    rows = transition_rows(analytic, rates, window_labels, registry, width=2)

    assert [r.label for r in rows] == [1]
    assert list(rows[0].features) == [300.0, 301.0, 400.0, 401.0]
    assert registry.pair(1) == (1, 2)


def test_transition_rows_without_gap_use_first_window():
    analytic, rates = _streams()
    window_labels = dict([(i, 1) for i in range(5)] + [(i, 2) for i in range(5, 10)])

    rows = transition_rows(analytic, rates, window_labels, TransitionLabels(), width=2)

    assert len(rows) == 1
    assert list(rows[0].features) == [400.0, 401.0, 500.0, 501.0]


def test_transition_rows_with_steady_rows():
    analytic, rates = _streams()
    window_labels = {0: 1, 1: 1, 2: 1, 3: 1, 5: 2, 6: 2, 7: 2, 8: 2, 9: 2}

    rows = transition_rows(analytic, rates, window_labels, TransitionLabels(), width=2, include_steady=True)

    steady = [r for r in rows if r.label == DefaultValues.STEADY_TRANSITION_LABEL]
    assert len(steady) == 6
    assert len(rows) == 7


def test_predictor_rows():
    rows = predictor_rows(list(range(20)), segment_length=5, horizons=(1, 5, 10))

    assert len(rows) == 6
    assert rows[0].label == (5, 9, 14)
    assert list(rows[0].features) == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert rows[-1].label == (10, 14, 19)

    assert predictor_rows(list(range(10)), segment_length=5, horizons=(1, 5, 10)) == []


def test_build_training_sets_uses_known_labels_only(tmp_path):
    analytic, rates = _streams()
    window_labels = {0: 1, 1: 1, 2: 1, 3: 1, 5: 2, 6: 2, 7: 2, 8: 2, 9: 9}
    db = _db([1, 2])

    sets = build_training_sets(db, analytic, rates, window_labels, TransitionLabels(), width=2, segment_length=2, horizons=(1,))

    assert sorted(set(r.label for r in sets.pure)) == [1, 2]
    assert len(sets.pure) == 8
    assert sets.label_sequence == [1, 1, 1, 1, 1, 2, 2, 2, 2, 9]
    assert len(sets.predictor) == 8

    output_dir = str(tmp_path / 'training')
    write_training_sets(sets, sets.pure, output_dir)

    for filename in (DefaultValues.PURE_TRAINING_FILE,
                     DefaultValues.WORKLOAD_TRAINING_FILE,
                     DefaultValues.TRANSITION_TRAINING_FILE,
                     DefaultValues.PREDICTOR_TRAINING_FILE):
        assert os.path.exists(os.path.join(output_dir, filename))

    pure = read_sparse(os.path.join(output_dir, DefaultValues.PURE_TRAINING_FILE), 2)
    assert [label for label, _ in pure] == [r.label for r in sets.pure]
    assert np.allclose(pure[3][1], sets.pure[3].features)

    predictor = read_sparse(os.path.join(output_dir, DefaultValues.PREDICTOR_TRAINING_FILE), 2)
    assert predictor[0][0] == 1
