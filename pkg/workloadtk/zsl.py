###############################################################################
#                                                                             #
#    This program is free software: you can redistribute it and/or modify     #
#    it under the terms of the GNU General Public License as published by     #
#    the Free Software Foundation, either version 3 of the License, or        #
#    (at your option) any later version.                                      #
#                                                                             #
#    This program is distributed in the hope that it will be useful,          #
#    but WITHOUT ANY WARRANTY; without even the implied warranty of           #
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the            #
#    GNU General Public License for more details.                             #
#                                                                             #
#    You should have received a copy of the GNU General Public License        #
#    along with this program. If not, see <http://www.gnu.org/licenses/>.     #
#                                                                             #
###############################################################################

"""Anticipate hybrid workloads of two concurrently running pure workloads."""

import logging
import itertools
from dataclasses import dataclass, field

import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.knowledge_base import (FeatureSummary,
                                       WorkloadCharacterization,
                                       WorkloadRecord)
from workloadtk.classifiers.forest import LabeledInstance
from workloadtk.exceptions import (NoPureClasses,
                                   SchemaMismatch,
                                   LabelCollision)


@dataclass
class ClassDescriptor:
    pure_classes: list = field(default_factory=list)
    hybrid_pairs: list = field(default_factory=list)

    def to_records(self):
        records = [{'kind': 'pure', 'label': label, 'characterization': c.to_record()}
                   for label, c in self.pure_classes]
        records.extend([{'kind': 'hybrid', 'label_a': a, 'label_b': b, 'label': h}
                        for a, b, h in self.hybrid_pairs])
        return records


def build_class_descriptors(db):
    """Pure classes from the WorkloadDB and a hybrid label for every pair of them.

    A pair that already has a synthetic record keeps its label;
    other pairs receive new labels from the WorkloadDB counter.
    """

    pure = db.observed_records()
    if not pure:
        raise NoPureClasses('The WorkloadDB holds no observed workloads.')

    existing = {}
    for record in db.synthetic_records():
        if record.parents:
            existing[tuple(sorted(record.parents))] = record.label

    descriptor = ClassDescriptor(pure_classes=[(r.label, r.characterization) for r in pure])

    next_label = db.next_label()
    for a, b in itertools.combinations([r.label for r in pure], 2):
        if (a, b) in existing:
            hybrid_label = existing[(a, b)]
        else:
            hybrid_label = next_label
            next_label += 1
        descriptor.hybrid_pairs.append((a, b, hybrid_label))

    return descriptor


def synthesize_prototype(a, b):
    """Characterization of an equal-weight mixture of two workloads.

    The standard deviation and noise are the second central moment
    of the two-component mixture.
    """

    if a.size != b.size:
        raise SchemaMismatch('Prototype parents have %d and %d features.' % (a.size, b.size))

    per_feature = []
    for sa, sb in zip(a.per_feature, b.per_feature):
        mean = (sa.mean + sb.mean) / 2.0
        std = np.sqrt((sa.std ** 2 + sb.std ** 2) / 2.0 + (sa.mean - sb.mean) ** 2 / 4.0)
        per_feature.append(FeatureSummary(mean,
                                          float(std),
                                          min(sa.min, sb.min),
                                          max(sa.max, sb.max),
                                          (sa.p90 + sb.p90) / 2.0,
                                          (sa.p75 + sb.p75) / 2.0))

    noise = [float(np.sqrt((na ** 2 + nb ** 2) / 2.0 + (sa.mean - sb.mean) ** 2 / 4.0))
             for na, nb, sa, sb in zip(a.noise, b.noise, a.per_feature, b.per_feature)]

    return WorkloadCharacterization(tuple(per_feature), tuple(noise), 0, ())


def sample_synthetic_instances(proto, n, seed, label=0):
    """Gaussian instances drawn around a prototype and clipped to its range."""

    assert n >= 1

    rng = np.random.default_rng(seed)
    means = proto.means
    stds = proto.stds
    lows = np.array([s.min for s in proto.per_feature])
    highs = np.array([s.max for s in proto.per_feature])

    draws = rng.normal(means, stds, size=(n, proto.size))
    draws = np.clip(draws, lows, highs)

    return [LabeledInstance(label, row) for row in draws]


def merge_training_sets(observed, synthetic):
    """Observed rows followed by synthetic rows; label sets must be disjoint."""

    collision = set(r.label for r in observed) & set(r.label for r in synthetic)
    if collision:
        raise LabelCollision('Synthetic rows reuse observed labels: %s' % ', '.join([str(l) for l in sorted(collision)]))

    return list(observed) + list(synthetic)


class WorkloadSynthesizer(object):
    """Synthesize hybrid workload classes for the workload classifier."""

    def __init__(self, num_instances=DefaultValues.SYNTHETIC_INSTANCES, seed=0):
        """Initialization.

        Parameters
        ----------
        num_instances : int
            Synthetic instances drawn per hybrid class.
        seed : int
            Base seed of the instance draws.
        """

        self.logger = logging.getLogger('timestamp')

        self.num_instances = num_instances
        self.seed = seed

    def run(self, db, observed):
        """Store hybrid prototypes and merge their instances with observed rows.

        Parameters
        ----------
        db : WorkloadDB
            Database receiving synthetic records.
        observed : list of LabeledInstance
            Pure workload training rows.

        Returns
        -------
        ClassDescriptor
            Pure and hybrid classes.
        list
            Merged training rows.
        """

        descriptor = build_class_descriptors(db)
        pure = dict(descriptor.pure_classes)

        synthetic = []
        for a, b, hybrid_label in descriptor.hybrid_pairs:
            proto = synthesize_prototype(pure[a], pure[b])
            if hybrid_label in db:
                stored = db.get(hybrid_label)
                db.upsert(WorkloadRecord(hybrid_label,
                                         proto,
                                         stored.has_optimal_config,
                                         stored.is_drifting,
                                         stored.config,
                                         True,
                                         (a, b)))
            else:
                db.upsert(WorkloadRecord(hybrid_label, proto, is_synthetic=True, parents=(a, b)))

            synthetic.extend(sample_synthetic_instances(proto,
                                                        self.num_instances,
                                                        [self.seed, hybrid_label],
                                                        hybrid_label))

        self.logger.info('Synthesized %d hybrid classes from %d pure classes.' % (len(descriptor.hybrid_pairs),
                                                                                 len(descriptor.pure_classes)))

        return descriptor, merge_training_sets(observed, synthetic)
