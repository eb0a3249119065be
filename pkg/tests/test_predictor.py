import pytest

from workloadtk.default_values import DefaultValues
from workloadtk.predictor import (FrequencyPredictor,
                                  WorkloadContext,
                                  ContextEmitter,
                                  train_predictor,
                                  predict,
                                  emit_context)
from workloadtk.exceptions import TooShort, OutOfOrder, InvalidRecord


PERIOD = [1, 2, 3, 1, 4, 5]


def test_periodic_sequence_is_learned():
    labels = PERIOD * 30
    model = train_predictor(labels[:120], k=3)

    hits = 0
    total = 0
    for i in range(120, len(labels) - 1):
        hits += predict(model, labels[i - 2:i + 1])[1] == labels[i + 1]
        total += 1

    assert hits / float(total) >= 0.95


def test_rollout_follows_the_period():
    model = train_predictor(PERIOD * 10, k=3)

    preds = predict(model, [3, 1, 4])

    assert preds == {1: 5, 5: 1, 10: 3}


def test_backoff_to_marginal():
    model = FrequencyPredictor(2).train([1, 1, 1, 2])

    assert model.next_label([9]) == 1
    assert model.next_label([1, 1]) == 1


def test_training_requires_two_labels():
    with pytest.raises(TooShort):
        train_predictor([4])


def test_predictor_persists(tmp_path):
    model = train_predictor(PERIOD * 5, k=3)
    model_file = str(tmp_path / 'predictor.json')
    model.save(model_file)

    loaded = FrequencyPredictor.load(model_file)

    assert loaded.to_record() == model.to_record()
    assert predict(loaded, [1, 2, 3]) == predict(model, [1, 2, 3])

    record = model.to_record()
    record['kind'] = 'markov'
    with pytest.raises(InvalidRecord):
        FrequencyPredictor.from_record(record)


def test_context_emitter_orders_windows(kb):
    emitter = ContextEmitter(kb)
    assert emit_context(emitter, 0, 1, {1: 1, 5: 2, 10: 1}, 10.0) == 0
    assert emit_context(emitter, 2, 1, {1: 2, 5: 2, 10: 2}, 30.0, in_transition=True) == 1

    with pytest.raises(OutOfOrder):
        emit_context(emitter, 2, 1, {1: 1, 5: 1, 10: 1}, 31.0)

    records = kb.read_stream(DefaultValues.ANALYTICS_ZONE, DefaultValues.CONTEXT_STREAM)
    assert WorkloadContext.from_record(records[1]) == WorkloadContext(2, 1, 2, 2, 2, 30.0, True)

    resumed = ContextEmitter(kb)
    with pytest.raises(OutOfOrder):
        emit_context(resumed, 1, 1, {1: 1, 5: 1, 10: 1}, 40.0)


class _FailingKnowledgeBase(object):

    def __init__(self):
        self.fail = True

    def read_stream(self, zone, name, offset=0):
        return []

    def append_stream(self, zone, name, record):
        if self.fail:
            raise OSError('disk full')
        return 0


def test_failed_append_leaves_emitter_unchanged():
    kb = _FailingKnowledgeBase()
    emitter = ContextEmitter(kb)

    with pytest.raises(OSError):
        emit_context(emitter, 0, 1, {1: 1, 5: 1, 10: 1}, 10.0)
    assert emitter.last_index is None
    assert emitter.last is None

    kb.fail = False
    assert emit_context(emitter, 0, 1, {1: 1, 5: 1, 10: 1}, 10.0) == 0
    assert emitter.last == WorkloadContext(0, 1, 1, 1, 1, 10.0, False)


def test_emitter_keeps_only_the_latest_context(kb):
    emitter = ContextEmitter()
    for t in range(5):
        assert emit_context(emitter, t, 1, {1: 1, 5: 1, 10: 1}, 10.0 * t) == t
    assert emitter.last.window_index == 4
    assert emitter.count == 5

    emit_context(ContextEmitter(kb), 3, 2, {1: 2, 5: 2, 10: 2}, 30.0)
    resumed = ContextEmitter(kb)
    assert resumed.last == WorkloadContext(3, 2, 2, 2, 2, 30.0, False)
    assert resumed.last_index == 3
