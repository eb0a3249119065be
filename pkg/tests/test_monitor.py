import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.change_detector import ChangePolicy
from workloadtk.windowing import to_analytic_window
from workloadtk.classifiers.forest import ForestParams, LabeledInstance, train_forest
from workloadtk.predictor import ContextEmitter
from workloadtk.training import TrainedModels
from workloadtk.monitor import WorkloadMonitor

from conftest import sampled_windows, plateau_means


A = [10.0, 50.0, 5.0, 100.0]
B = [40.0, 20.0, 25.0, 60.0]


def _stream(seed=0):
    return sampled_windows(plateau_means([A, B], [10, 10]), seed=seed)


def _trained():
    data = []
    for label, center in ((1, A), (2, B)):
        for w in sampled_windows([center] * 30, seed=label):
            data.append(LabeledInstance(label, np.array(to_analytic_window(w).features)))
    return TrainedModels(workload=train_forest(data, ForestParams(10, 6, 2), seed=3))


def test_untrained_monitor_emits_unknown_labels():
    emitter = ContextEmitter()
    monitor = WorkloadMonitor(emitter, ChangePolicy(alpha=1e-4))

    steps = [monitor.process(w, w.end) for w in _stream()]

    assert 10 in monitor.flagged
    assert [s.context.window_index for s in steps] == list(range(20))
    assert all(s.context.current_label == DefaultValues.UNKNOWN_LABEL for s in steps)
    assert all(s.context.in_transition == (s.context.window_index in monitor.flagged) for s in steps)
    assert steps[0].rate is None
    assert steps[1].rate is not None


def test_trained_monitor_labels_steady_windows():
    monitor = WorkloadMonitor(ContextEmitter(), ChangePolicy(alpha=1e-4))
    monitor.update_models(_trained())

    steps = [monitor.process(w, w.end) for w in _stream(seed=9)]

    # the changed window keeps the label of its predecessor
    assert steps[10].flagged
    assert steps[10].context.current_label == steps[9].context.current_label
    assert steps[10].context.in_transition

    for t, step in enumerate(steps):
        if not step.flagged:
            assert step.context.current_label == (1 if t < 10 else 2)
            assert step.confidence > 0.5


def test_missing_models_keep_previous_ones():
    monitor = WorkloadMonitor(ContextEmitter())
    trained = _trained()
    monitor.update_models(trained)

    monitor.update_models(TrainedModels())

    assert monitor.workload_model is trained.workload
    assert monitor.predictor is None


def test_mismatched_transition_model_is_skipped():
    rng = np.random.default_rng(4)
    data = [LabeledInstance(label, rng.normal(label, 0.1, size=3)) for label in (1, 2) for _ in range(10)]
    monitor = WorkloadMonitor(ContextEmitter(), ChangePolicy(alpha=1e-4))
    monitor.update_models(TrainedModels(workload=_trained().workload,
                                        transition=train_forest(data, ForestParams(5, 4, 1), seed=1)))

    steps = [monitor.process(w, w.end) for w in _stream(seed=9)]

    assert steps[10].flagged
    assert steps[10].transition_label is None
    assert monitor.transitions == {}
    assert [s.context.window_index for s in steps] == list(range(20))
