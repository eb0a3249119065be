import numpy as np
import pytest

from workloadtk.knowledge_base import (FeatureSummary,
                                       WorkloadCharacterization,
                                       WorkloadDB,
                                       WorkloadRecord)
from workloadtk.classifiers.forest import LabeledInstance
from workloadtk.zsl import (WorkloadSynthesizer,
                            build_class_descriptors,
                            synthesize_prototype,
                            sample_synthetic_instances,
                            merge_training_sets)
from workloadtk.exceptions import NoPureClasses, LabelCollision, SchemaMismatch


def _pure(means, stds, noise=None):
    per_feature = [FeatureSummary(m, s, m - 4 * s, m + 4 * s, m + 1.3 * s, m + 0.7 * s) for m, s in zip(means, stds)]
    return WorkloadCharacterization.with_windows(per_feature, noise if noise else list(stds), list(range(10)))


def _db(num_pure):
    db = WorkloadDB()
    for label in range(1, num_pure + 1):
        db.upsert(WorkloadRecord(label, _pure([10.0 * label, 5.0], [1.0 + label, 0.5])))
    return db


def test_prototype_matches_mixture_moments():
    a = _pure([10.0, 40.0], [2.0, 1.0])
    b = _pure([30.0, 45.0], [3.0, 6.0])

    proto = synthesize_prototype(a, b)

    rng = np.random.default_rng(17)
    n = 200000
    pick_a = rng.random(n) < 0.5
    samples = np.where(pick_a[:, np.newaxis],
                       rng.normal(a.means, a.stds, size=(n, 2)),
                       rng.normal(b.means, b.stds, size=(n, 2)))

    assert proto.means == pytest.approx(samples.mean(axis=0), rel=0.01)
    assert proto.stds == pytest.approx(samples.std(axis=0), rel=0.01)
    assert proto.noise == pytest.approx(proto.stds)
    assert proto.window_count == 0

    s = proto.per_feature[0]
    assert (s.min, s.max) == (a.per_feature[0].min, b.per_feature[0].max)


def test_prototype_schema_mismatch():
    with pytest.raises(SchemaMismatch):
        synthesize_prototype(_pure([1.0], [1.0]), _pure([1.0, 2.0], [1.0, 1.0]))


def test_class_descriptors_cover_every_pair():
    descriptor = build_class_descriptors(_db(3))

    assert [label for label, _ in descriptor.pure_classes] == [1, 2, 3]
    assert descriptor.hybrid_pairs == [(1, 2, 4), (1, 3, 5), (2, 3, 6)]
    assert len(descriptor.to_records()) == 6


def test_class_descriptors_need_pure_classes():
    with pytest.raises(NoPureClasses):
        build_class_descriptors(WorkloadDB())


def test_synthetic_instances_stay_in_range():
    proto = synthesize_prototype(_pure([10.0], [2.0]), _pure([30.0], [3.0]))

    rows = sample_synthetic_instances(proto, 500, seed=3, label=9)

    values = np.array([r.features[0] for r in rows])
    assert len(rows) == 500
    assert all(r.label == 9 for r in rows)
    assert values.min() >= proto.per_feature[0].min
    assert values.max() <= proto.per_feature[0].max


def test_merge_rejects_label_collision():
    observed = [LabeledInstance(1, np.zeros(2)), LabeledInstance(2, np.ones(2))]

    assert len(merge_training_sets(observed, [LabeledInstance(3, np.ones(2))])) == 3
    with pytest.raises(LabelCollision):
        merge_training_sets(observed, [LabeledInstance(2, np.ones(2))])


def test_synthesizer_keeps_hybrid_labels_stable():
    db = _db(2)
    observed = [LabeledInstance(1, np.array([10.0, 5.0])), LabeledInstance(2, np.array([20.0, 5.0]))]

    descriptor, merged = WorkloadSynthesizer(num_instances=25, seed=4).run(db, observed)

    assert descriptor.hybrid_pairs == [(1, 2, 3)]
    assert len(merged) == 27
    hybrid = db.get(3)
    assert hybrid.is_synthetic
    assert hybrid.parents == (1, 2)

    db.upsert(WorkloadRecord(4, _pure([80.0, 5.0], [2.0, 0.5])))
    descriptor, merged_again = WorkloadSynthesizer(num_instances=25, seed=4).run(db, observed)

    assert descriptor.hybrid_pairs == [(1, 2, 3), (1, 4, 5), (2, 4, 6)]
    assert np.array_equal(merged_again[2].features, merged[2].features)
    assert [r.label for r in db.synthetic_records()] == [3, 5, 6]
