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

"""Quality metrics of a run and the versioned metrics report."""

import os
import json
from collections import Counter, defaultdict

import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.common import standardized_distance
from workloadtk.exceptions import IndexMismatch, NoReport, InvalidRecord


REPORT_DIGITS = 6


def metric_purity(assignments, ground_truth):
    """Fraction of windows in the majority truth class of their cluster.

    Parameters
    ----------
    assignments : dict
        Cluster label of each window index.
    ground_truth : dict
        Truth class of each window index.
    """

    if set(assignments) != set(ground_truth):
        raise IndexMismatch('Cluster assignments cover %d windows, ground truth covers %d.' % (len(assignments),
                                                                                             len(ground_truth)))
    if not assignments:
        return 0.0

    overlap = defaultdict(Counter)
    for idx, cluster in assignments.items():
        overlap[cluster][ground_truth[idx]] += 1

    return sum(max(c.values()) for c in overlap.values()) / float(len(assignments))


def metric_awt(clusters, truth_types, scale=None):
    """Fraction of truth types identified by a cluster.

    A cluster can identify only the truth type whose mean is nearest
    to its centroid. Pairs are matched greedily in ascending distance
    with each cluster and each type used once.

    Parameters
    ----------
    clusters : dict
        Centroid of each cluster label.
    truth_types : dict
        Mean feature vector of each truth type.
    scale : numpy.ndarray
        Per-feature scale of the distance; unit scale if None.
    """

    if not truth_types:
        return 0.0

    type_names = sorted(truth_types)
    candidates = []
    for label in sorted(clusters):
        centroid = np.asarray(clusters[label], dtype=float)
        if scale is None:
            s = np.ones(len(centroid))
        else:
            s = scale
        dists = [(standardized_distance(centroid, np.asarray(truth_types[t], dtype=float), s), t) for t in type_names]
        d, nearest = min(dists)
        candidates.append((d, label, nearest))

    used_clusters = set()
    used_types = set()
    for _d, label, truth in sorted(candidates):
        if label in used_clusters or truth in used_types:
            continue
        used_clusters.add(label)
        used_types.add(truth)

    return len(used_types) / float(len(truth_types))


def change_precision_recall(flagged, transitions):
    """Precision and recall of flagged windows against true transition windows.

    Precision is 1 when nothing is flagged; recall is 1 when there
    are no transitions.
    """

    flagged = set(flagged)
    transitions = set(transitions)
    hits = len(flagged & transitions)

    precision = hits / float(len(flagged)) if flagged else 1.0
    recall = hits / float(len(transitions)) if transitions else 1.0

    return precision, recall


def prediction_accuracy(contexts, horizon):
    """Fraction of predictions matching the on-line label horizon windows later.

    Windows with an unknown current or future label are skipped.
    """

    by_index = {ctx.window_index: ctx for ctx in contexts}
    attr = 'pred_t%d' % horizon

    hits = 0
    total = 0
    for ctx in contexts:
        future = by_index.get(ctx.window_index + horizon)
        if future is None:
            continue
        if ctx.current_label == DefaultValues.UNKNOWN_LABEL or future.current_label == DefaultValues.UNKNOWN_LABEL:
            continue
        total += 1
        if getattr(ctx, attr) == future.current_label:
            hits += 1

    return hits / float(total) if total else 0.0


def tuning_efficiency(jobs, optima, transitions):
    """Optimal over achieved runtime of the last steady job of each truth type.

    Parameters
    ----------
    jobs : list of JobRecord
        Completed jobs in window order.
    optima : dict
        Noise-free optimal runtime of the workload at each window.
    transitions : set
        Transition window indices; their jobs are ignored.
    """

    last = {}
    for job in jobs:
        if job.window_index not in transitions:
            last[job.truth] = job

    return {truth: optima[job.window_index] / job.expected for truth, job in sorted(last.items())}


def probes_by_label(decisions):
    """Probes spent on each workload label and the number of searches."""

    probes = Counter()
    searches = Counter()
    for d in decisions:
        if d.label == DefaultValues.UNKNOWN_LABEL:
            continue
        probes[d.label] += d.probes
        if d.probes > 0:
            searches[d.label] += 1

    return dict(probes), dict(searches)


def runtime_ratio(jobs, baseline):
    """Mean expected runtime of the jobs over the mean under a baseline configuration."""

    if not jobs:
        return 0.0

    achieved = np.mean([j.expected for j in jobs])
    base = np.mean([getattr(j, baseline) for j in jobs])

    return float(achieved / base)


def _round(value):
    if isinstance(value, dict):
        return {str(k): _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return round(float(value), REPORT_DIGITS)
    return value


def write_report(report, output_file):
    """Write a metrics report as canonical JSON."""

    with open(output_file, 'w') as fout:
        fout.write(json.dumps(_round(report), sort_keys=True, indent=2) + '\n')


def read_report(run_dir):
    report_file = os.path.join(run_dir, DefaultValues.REPORT_FILE)
    if not os.path.exists(report_file):
        raise NoReport('No metrics report in %s.' % run_dir)

    with open(report_file) as f:
        try:
            report = json.load(f)
        except ValueError:
            raise InvalidRecord('Unable to parse metrics report: %s' % report_file)

    if report.get('version') != DefaultValues.REPORT_VERSION:
        raise InvalidRecord('Unsupported metrics report version: %s' % report.get('version'))

    return report


def format_report(report):
    """Human-readable summary, one metric per line."""

    lines = []
    for key in sorted(report):
        value = report[key]
        if isinstance(value, dict):
            for sub_key in sorted(value):
                lines.append('%s[%s]\t%s' % (key, sub_key, value[sub_key]))
        else:
            lines.append('%s\t%s' % (key, value))

    return '\n'.join(lines) + '\n'
