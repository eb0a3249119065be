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

import numpy as np


class DecisionTree(object):
    """CART classification tree with axis-aligned threshold splits.

    Nodes are kept in a flat list. An internal node holds a feature
    index, a threshold and the positions of its children; samples
    with value <= threshold go left. A leaf holds the count of
    training samples of each class.
    """

    def __init__(self, num_classes, max_depth, min_leaf, features_per_split):
        """Initialization.

        Parameters
        ----------
        num_classes : int
            Number of classes of the forest the tree belongs to.
        max_depth : int
            Maximum depth of the tree.
        min_leaf : int
            Minimum number of samples in a leaf.
        features_per_split : int
            Number of features considered at each node.
        """

        self.num_classes = num_classes
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.features_per_split = features_per_split

        self.nodes = []

    def _gini(self, counts):
        n = counts.sum()
        if n == 0:
            return 0.0
        p = counts / n
        return 1.0 - float(np.sum(p ** 2))

    def _best_split(self, col, y, parent_gini):
        """Best threshold on a single feature by a sorted sweep.

        Returns
        -------
        float
            Midpoint threshold, or None if no valid split exists.
        float
            Decrease in weighted Gini impurity.
        """

        n = len(y)
        order = np.argsort(col, kind='mergesort')
        sorted_vals = col[order]
        sorted_y = y[order]

        # split after position i keeps i + 1 samples on the left
        candidates = np.flatnonzero(sorted_vals[:-1] != sorted_vals[1:])
        candidates = candidates[(candidates + 1 >= self.min_leaf) & (n - candidates - 1 >= self.min_leaf)]
        if len(candidates) == 0:
            return None, 0.0

        one_hot = np.zeros((n, self.num_classes))
        one_hot[np.arange(n), sorted_y] = 1.0
        cum_counts = np.cumsum(one_hot, axis=0)

        left_counts = cum_counts[candidates]
        right_counts = cum_counts[-1] - left_counts
        n_left = (candidates + 1).astype(float)
        n_right = n - n_left

        gini_left = 1.0 - np.sum((left_counts / n_left[:, np.newaxis]) ** 2, axis=1)
        gini_right = 1.0 - np.sum((right_counts / n_right[:, np.newaxis]) ** 2, axis=1)
        gains = parent_gini - (n_left * gini_left + n_right * gini_right) / n

        best = int(np.argmax(gains))
        i = candidates[best]

        return (sorted_vals[i] + sorted_vals[i + 1]) / 2.0, float(gains[best])

    def _leaf(self, counts):
        self.nodes.append({'counts': [int(c) for c in counts]})
        return len(self.nodes) - 1

    def _build(self, X, y, depth, rng):
        counts = np.bincount(y, minlength=self.num_classes)
        if depth >= self.max_depth or len(y) < 2 * self.min_leaf or np.count_nonzero(counts) == 1:
            return self._leaf(counts)

        parent_gini = self._gini(counts)
        num_features = X.shape[1]
        features = rng.choice(num_features, size=min(self.features_per_split, num_features), replace=False)

        best_feature = None
        best_threshold = None
        best_gain = 0.0
        for f in features:
            threshold, gain = self._best_split(X[:, f], y, parent_gini)
            if threshold is not None and gain > best_gain:
                best_feature = int(f)
                best_threshold = float(threshold)
                best_gain = gain

        if best_feature is None:
            return self._leaf(counts)

        node_id = len(self.nodes)
        self.nodes.append({'feature': best_feature, 'threshold': best_threshold, 'left': -1, 'right': -1})

        left_mask = X[:, best_feature] <= best_threshold
        self.nodes[node_id]['left'] = self._build(X[left_mask], y[left_mask], depth + 1, rng)
        self.nodes[node_id]['right'] = self._build(X[~left_mask], y[~left_mask], depth + 1, rng)

        return node_id

    def fit(self, X, y, rng):
        """Grow the tree.

        Parameters
        ----------
        X : numpy.ndarray
            Training matrix.
        y : numpy.ndarray
            Class index of each row.
        rng : numpy.random.Generator
            Source of the per-node feature subsets.
        """

        self.nodes = []
        self._build(X, y, 0, rng)

        return self

    def leaf_counts(self, x):
        node = self.nodes[0]
        while 'counts' not in node:
            if x[node['feature']] <= node['threshold']:
                node = self.nodes[node['left']]
            else:
                node = self.nodes[node['right']]

        return node['counts']

    def predict(self, x):
        """Class index with the most training samples in x's leaf; ties go to the smaller index."""

        return int(np.argmax(self.leaf_counts(x)))

    def to_record(self):
        return {'nodes': self.nodes}

    @classmethod
    def from_record(cls, record, num_classes, max_depth, min_leaf, features_per_split):
        tree = cls(num_classes, max_depth, min_leaf, features_per_split)
        tree.nodes = record['nodes']
        return tree
