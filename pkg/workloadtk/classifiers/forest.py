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

import json
import math
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from biolib.parallel import Parallel

from workloadtk.default_values import DefaultValues
from workloadtk.classifiers.decision_tree import DecisionTree
from workloadtk.exceptions import (EmptyTrainingSet,
                                   DimensionMismatch,
                                   InvalidRecord)


class LabeledInstance(NamedTuple):
    label: object
    features: np.ndarray


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = DefaultValues.N_TREES
    max_depth: int = DefaultValues.MAX_DEPTH
    min_leaf: int = DefaultValues.MIN_LEAF
    features_per_split: int = None

    def resolve(self, num_features):
        """Hyperparameters with features_per_split defaulting to ceil(sqrt(d))."""

        if self.features_per_split:
            return self
        return ForestParams(self.n_trees, self.max_depth, self.min_leaf, int(math.ceil(math.sqrt(num_features))))

    def to_record(self):
        return {'n_trees': self.n_trees,
                'max_depth': self.max_depth,
                'min_leaf': self.min_leaf,
                'features_per_split': self.features_per_split}


class ForestModel(object):
    """Majority-vote ensemble of decision trees."""

    def __init__(self, trees, classes, params, seed, num_features, oob_accuracy=None):
        self.trees = trees
        self.classes = tuple(classes)
        self.params = params
        self.seed = seed
        self.num_features = num_features
        self.oob_accuracy = oob_accuracy

    def votes(self, x):
        """Number of trees voting for each class."""

        x = np.asarray(x, dtype=float)
        if x.shape != (self.num_features,):
            raise DimensionMismatch('Model expects %d features, received %d.' % (self.num_features, x.size))

        votes = np.zeros(len(self.classes), dtype=int)
        for tree in self.trees:
            votes[tree.predict(x)] += 1

        return votes

    def predict(self, x):
        """Plurality label and the fraction of trees voting for it.

        Ties go to the smallest label.
        """

        votes = self.votes(x)
        best = int(np.argmax(votes))

        return self.classes[best], votes[best] / float(len(self.trees))

    def to_record(self):
        return {'version': DefaultValues.MODEL_VERSION,
                'kind': 'random_forest',
                'seed': self.seed,
                'num_features': self.num_features,
                'classes': list(self.classes),
                'params': self.params.to_record(),
                'oob_accuracy': self.oob_accuracy,
                'trees': [t.to_record() for t in self.trees]}

    @classmethod
    def from_record(cls, record):
        if record.get('version') != DefaultValues.MODEL_VERSION or record.get('kind') != 'random_forest':
            raise InvalidRecord('Unsupported model file version.')

        params = ForestParams(**record['params'])
        classes = [int(c) for c in record['classes']]
        trees = [DecisionTree.from_record(t,
                                          len(classes),
                                          params.max_depth,
                                          params.min_leaf,
                                          params.features_per_split) for t in record['trees']]

        return cls(trees, classes, params, record['seed'], record['num_features'], record['oob_accuracy'])

    def save(self, output_file):
        with open(output_file, 'w') as fout:
            fout.write(json.dumps(self.to_record(), sort_keys=True) + '\n')

    @classmethod
    def load(cls, model_file):
        with open(model_file) as f:
            return cls.from_record(json.load(f))


def balanced_bootstrap(y, rng):
    """Bootstrap sample drawing the same number of rows from every class.

    Each of the C classes present contributes ceil(n / C) rows drawn
    with replacement from its own rows.

    Parameters
    ----------
    y : numpy.ndarray
        Class index of each training row.
    rng : numpy.random.Generator
        Generator of the tree.

    Returns
    -------
    numpy.ndarray
        Row indices of the sample.
    """

    classes = np.unique(y)
    per_class = int(math.ceil(len(y) / float(len(classes))))

    sample = [rng.choice(np.flatnonzero(y == c), size=per_class, replace=True) for c in classes]
    return np.concatenate(sample)


class ForestTrainer(object):
    """Train the trees of a random forest, in parallel when cpus > 1."""

    def __init__(self, cpus=1):
        """Initialization.

        Parameters
        ----------
        cpus : int
            Number of cpus to use.
        """

        self.logger = logging.getLogger('timestamp')

        self.cpus = cpus

    def _producer(self, tree_index):
        """Grow one tree on a class-balanced bootstrap sample.

        Parameters
        ----------
        tree_index : int
            Index of the tree in the forest.
        """

        rng = np.random.default_rng([self.seed, tree_index])

        n = self.X.shape[0]
        sample = balanced_bootstrap(self.y, rng)
        tree = DecisionTree(len(self.classes),
                            self.params.max_depth,
                            self.params.min_leaf,
                            self.params.features_per_split)
        tree.fit(self.X[sample], self.y[sample], rng)

        in_bag = np.zeros(n, dtype=bool)
        in_bag[sample] = True

        return tree_index, tree.nodes, np.flatnonzero(~in_bag)

    def _consumer(self, produced_data, consumer_data):
        if consumer_data is None:
            consumer_data = []
        consumer_data.append(produced_data)

        return consumer_data

    def _progress(self, processed_items, total_items):
        """Report progress of tree training."""

        return '    Trained %d of %d trees.' % (processed_items, total_items)

    def run(self, data, params, seed):
        """Train a random forest.

        Parameters
        ----------
        data : list of LabeledInstance
            Training rows.
        params : ForestParams
            Forest hyperparameters.
        seed : int
            Seed of the per-tree random generators.

        Returns
        -------
        ForestModel
            Trained model.
        """

        if len(data) < 2:
            raise EmptyTrainingSet('Training a forest requires at least 2 instances, received %d.' % len(data))

        num_features = len(data[0].features)
        if any(len(d.features) != num_features for d in data):
            raise DimensionMismatch('Training instances have differing feature counts.')

        self.classes = sorted(set(d.label for d in data))
        class_index = {c: i for i, c in enumerate(self.classes)}
        self.X = np.array([d.features for d in data], dtype=float)
        self.y = np.array([class_index[d.label] for d in data], dtype=int)
        self.params = params.resolve(num_features)
        self.seed = seed

        if self.cpus > 1:
            parallel = Parallel(self.cpus)
            results = parallel.run(self._producer, self._consumer, range(self.params.n_trees), self._progress)
        else:
            results = [self._producer(i) for i in range(self.params.n_trees)]
        results = sorted(results, key=lambda r: r[0])

        trees = []
        oob_votes = np.zeros((len(data), len(self.classes)), dtype=int)
        for _tree_index, nodes, oob in results:
            tree = DecisionTree(len(self.classes),
                                self.params.max_depth,
                                self.params.min_leaf,
                                self.params.features_per_split)
            tree.nodes = nodes
            trees.append(tree)
            for i in oob:
                oob_votes[i, tree.predict(self.X[i])] += 1

        has_oob = oob_votes.sum(axis=1) > 0
        oob_accuracy = None
        if np.any(has_oob):
            correct = np.argmax(oob_votes[has_oob], axis=1) == self.y[has_oob]
            oob_accuracy = float(correct.mean())

        self.logger.info('Trained %d trees over %d instances and %d classes (out-of-bag accuracy %s).' % (len(trees),
                                                                                                        len(data),
                                                                                                        len(self.classes),
                                                                                                        'n/a' if oob_accuracy is None else '%.3f' % oob_accuracy))

        return ForestModel(trees, self.classes, self.params, seed, num_features, oob_accuracy)


def train_forest(data, params=None, seed=0, cpus=1):
    """Train a random forest on labelled instances."""

    return ForestTrainer(cpus).run(data, params if params else ForestParams(), seed)


def classify_window(m, a):
    """Workload label and confidence for an analytic window."""

    return m.predict(a.features)


def classify_transition(m, features):
    """Transition label and confidence for a flattened rate-window subsequence."""

    return m.predict(features)


def evaluate(m, labeled):
    """Accuracy, purity and confusion matrix of a model on labelled instances.

    Returns
    -------
    dict
        accuracy, purity and a confusion matrix with rows for true
        labels and columns for predicted labels.
    """

    assert labeled

    predicted = [m.predict(d.features)[0] for d in labeled]
    truth = [d.label for d in labeled]

    labels = sorted(set(truth) | set(predicted))
    pos = {label: i for i, label in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=int)
    for t, p in zip(truth, predicted):
        matrix[pos[t], pos[p]] += 1

    accuracy = float(np.trace(matrix)) / len(labeled)
    purity = float(matrix.max(axis=0).sum()) / len(labeled)

    return {'accuracy': accuracy,
            'purity': purity,
            'confusion': {'labels': labels, 'matrix': matrix.tolist()}}
