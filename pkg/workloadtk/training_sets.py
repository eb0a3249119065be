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

"""Training sets for the on-line classifiers and the workload predictor."""

import os
import logging
from dataclasses import dataclass, field

import numpy as np

from biolib.common import make_sure_path_exists

from workloadtk.default_values import DefaultValues
from workloadtk.common import write_sparse
from workloadtk.windowing import AnalyticWindow, RateWindow
from workloadtk.classifiers.forest import LabeledInstance


class TransitionLabels(object):
    """Integer labels for ordered (from, to) workload pairs.

    Label 0 is the steady-state class; generated labels start at 1.
    """

    def __init__(self, kb=None):
        """Initialization.

        Parameters
        ----------
        kb : KnowledgeBase
            Knowledge base persisting the registry, or None to keep
            it in memory.
        """

        self.kb = kb
        self.labels = {}

        if kb:
            for r in kb.read_stream(DefaultValues.ANALYTICS_ZONE, DefaultValues.TRANSITION_LABEL_STREAM):
                self.labels[(int(r['from']), int(r['to']))] = int(r['label'])

    def __len__(self):
        return len(self.labels)

    def next_label(self):
        if not self.labels:
            return 1
        return max(self.labels.values()) + 1

    def label(self, from_label, to_label):
        """Label of a transition, generated on first use."""

        key = (int(from_label), int(to_label))
        if key not in self.labels:
            self.labels[key] = self.next_label()
            if self.kb:
                self.kb.append_stream(DefaultValues.ANALYTICS_ZONE,
                                      DefaultValues.TRANSITION_LABEL_STREAM,
                                      {'from': key[0], 'to': key[1], 'label': self.labels[key]})

        return self.labels[key]

    def pair(self, label):
        for key, value in self.labels.items():
            if value == label:
                return key
        return None


@dataclass
class TrainingSets:
    pure: list = field(default_factory=list)
    transition: list = field(default_factory=list)
    predictor: list = field(default_factory=list)
    label_sequence: list = field(default_factory=list)


def read_window_labels(kb):
    """Window index to workload label, latest tag winning."""

    window_labels = {}
    for r in kb.read_stream(DefaultValues.ANALYTICS_ZONE, DefaultValues.WINDOW_LABEL_STREAM):
        window_labels[int(r['index'])] = int(r['label'])

    return window_labels


def label_sequence(indices, window_labels):
    """Label of each window, untagged windows carrying the previous label.

    The sequence starts at the first tagged window.
    """

    y = []
    current = None
    for idx in indices:
        if idx in window_labels:
            current = window_labels[idx]
        if current is not None:
            y.append(current)

    return y


def flatten_rates(rate_by_index, t, width):
    """Concatenated deltas of the width rate windows ending at t."""

    rows = []
    for idx in range(t - width + 1, t + 1):
        if idx not in rate_by_index:
            return None
        rows.extend(rate_by_index[idx].deltas)

    return np.array(rows, dtype=float)


def pure_workload_rows(analytic_windows, window_labels, db):
    """Analytic windows tagged with the label of their cluster."""

    rows = []
    for a in analytic_windows:
        label = window_labels.get(a.index)
        if label is not None and label in db:
            rows.append(LabeledInstance(label, np.array(a.features, dtype=float)))

    return rows


def transition_rows(analytic_windows, rate_windows, window_labels, registry,
                    width=DefaultValues.TRANSITION_WIDTH,
                    include_steady=False,
                    max_steady_rows=DefaultValues.MAX_STEADY_ROWS):
    """Flattened rate subsequences covering each inter-workload transition.

    Every untagged window between the last window of one workload
    and the first window of the next yields a row; when there is
    no untagged window, the first window of the next workload does.
    """

    rate_by_index = {r.index: r for r in rate_windows}
    indices = [a.index for a in analytic_windows]

    rows = []
    prev_label = None
    gap = []
    steady = []
    for idx in indices:
        label = window_labels.get(idx)
        if label is None:
            gap.append(idx)
            continue

        if prev_label is not None and label != prev_label:
            transition_label = registry.label(prev_label, label)
            for t in (gap if gap else [idx]):
                features = flatten_rates(rate_by_index, t, width)
                if features is not None:
                    rows.append(LabeledInstance(transition_label, features))
        elif prev_label is not None and not gap:
            steady.append(idx)

        prev_label = label
        gap = []

    if include_steady and steady:
        step = max(1, int(np.ceil(len(steady) / float(max_steady_rows))))
        for t in steady[::step]:
            features = flatten_rates(rate_by_index, t, width)
            if features is not None:
                rows.append(LabeledInstance(DefaultValues.STEADY_TRANSITION_LABEL, features))

    return rows


def predictor_rows(y, segment_length=DefaultValues.SEGMENT_LENGTH, horizons=DefaultValues.HORIZONS):
    """Sliding label segments with targets at each horizon past the segment end."""

    rows = []
    max_h = max(horizons)
    for i in range(len(y) - segment_length - max_h + 1):
        end = i + segment_length - 1
        targets = tuple(y[end + h] for h in horizons)
        rows.append(LabeledInstance(targets, np.array(y[i:i + segment_length], dtype=float)))

    return rows


def build_training_sets(db, analytic_windows, rate_windows, window_labels, registry,
                        width=DefaultValues.TRANSITION_WIDTH,
                        include_steady=False,
                        segment_length=DefaultValues.SEGMENT_LENGTH,
                        horizons=DefaultValues.HORIZONS):
    """Training sets for the workload classifier, transition classifier and predictor.

    Parameters
    ----------
    db : WorkloadDB
        Discovered workloads.
    analytic_windows : list of AnalyticWindow
        Analytic window stream in index order.
    rate_windows : list of RateWindow
        Rate-of-change stream.
    window_labels : dict
        Workload label of every window assigned to a cluster.
    registry : TransitionLabels
        Transition label registry, extended as new transitions appear.
    width : int
        Rate windows per transition row.
    include_steady : bool
        Add steady-state rows with the no-op transition label.
    segment_length : int
        Labels per predictor segment.
    horizons : tuple
        Prediction offsets past a segment's last label.

    Returns
    -------
    TrainingSets
        Rows of each training set as (label, features) pairs.
    """

    assert len(db) > 0

    sets = TrainingSets()
    sets.pure = pure_workload_rows(analytic_windows, window_labels, db)
    sets.transition = transition_rows(analytic_windows, rate_windows, window_labels, registry, width, include_steady)
    sets.label_sequence = label_sequence([a.index for a in analytic_windows], window_labels)
    sets.predictor = predictor_rows(sets.label_sequence, segment_length, horizons)

    logging.getLogger('timestamp').info('Built %d workload rows, %d transition rows and %d predictor segments.' % (len(sets.pure),
                                                                                                                   len(sets.transition),
                                                                                                                   len(sets.predictor)))

    return sets


def read_window_streams(kb):
    """Analytic and rate window streams from the transformation zone."""

    analytic = [AnalyticWindow.from_record(r) for r in kb.read_stream(DefaultValues.TRANSFORMATION_ZONE,
                                                                      DefaultValues.ANALYTIC_STREAM)]
    rates = [RateWindow.from_record(r) for r in kb.read_stream(DefaultValues.TRANSFORMATION_ZONE,
                                                               DefaultValues.RATE_STREAM)]

    return analytic, rates


def write_training_sets(sets, merged_rows, output_dir):
    """Write training sets in sparse `label idx:value` format."""

    make_sure_path_exists(output_dir)

    write_sparse(sets.pure, os.path.join(output_dir, DefaultValues.PURE_TRAINING_FILE))
    write_sparse(merged_rows, os.path.join(output_dir, DefaultValues.WORKLOAD_TRAINING_FILE))
    write_sparse(sets.transition, os.path.join(output_dir, DefaultValues.TRANSITION_TRAINING_FILE))
    write_sparse(sets.predictor, os.path.join(output_dir, DefaultValues.PREDICTOR_TRAINING_FILE))
