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

"""Off-line workload discovery and drift detection."""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.common import (zscore_scales,
                               standardize,
                               standardized_distance,
                               nearest_rank,
                               index_ranges)
from workloadtk.windowing import pool_stats
from workloadtk.change_detector import (ChangePolicy,
                                        detect_batch,
                                        welch_tests)
from workloadtk.knowledge_base import (FeatureSummary,
                                       WorkloadCharacterization,
                                       WorkloadRecord)
from workloadtk.exceptions import (SchemaMismatch,
                                   TooFewWindows)


@dataclass(frozen=True)
class Cluster:
    members: Tuple[int, ...]
    centroid: Tuple[float, ...]


@dataclass
class DiscoveryReport:
    new_labels: list = field(default_factory=list)
    matched_labels: list = field(default_factory=list)
    drifting_labels: list = field(default_factory=list)
    noise_window_count: int = 0
    batch_range: Tuple[int, int] = (0, 0)
    transition_windows: list = field(default_factory=list)
    assignments: dict = field(default_factory=dict)
    clusters: list = field(default_factory=list)

    def to_record(self):
        return {'batch_range': list(self.batch_range),
                'new_labels': self.new_labels,
                'matched_labels': self.matched_labels,
                'drifting_labels': self.drifting_labels,
                'noise_window_count': self.noise_window_count,
                'transition_windows': index_ranges(self.transition_windows),
                'clusters': self.clusters}


@dataclass(frozen=True)
class DiscoveryParams:
    eps: float = DefaultValues.DBSCAN_EPS
    min_pts: int = DefaultValues.DBSCAN_MIN_PTS
    noise_floor: float = DefaultValues.DBSCAN_NOISE_FLOOR
    epsilon_drift: float = DefaultValues.DRIFT_EPSILON
    alpha_match: float = DefaultValues.ALPHA_MATCH
    match_radius: float = DefaultValues.MATCH_RADIUS
    policy: ChangePolicy = ChangePolicy()


def dbscan(points, eps, min_pts):
    """Density-based clustering of points.

    The neighbourhood of a point includes the point itself. Points
    are scanned in input order; a border point joins the first
    cluster that reaches it.

    Parameters
    ----------
    points : array_like
        Matrix with one row per point.
    eps : float
        Neighbourhood radius.
    min_pts : int
        Neighbourhood size required for a core point.

    Returns
    -------
    list of Cluster
        Clusters with members given as row positions.
    set
        Row positions of noise points.
    """

    assert eps > 0
    assert min_pts >= 1

    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    assert n > 0

    diff = points[:, np.newaxis, :] - points[np.newaxis, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    neighbours = [np.flatnonzero(dist[i] <= eps) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighbours])

    assigned = np.full(n, -1, dtype=int)
    clusters = []
    for i in range(n):
        if assigned[i] != -1 or not core[i]:
            continue

        cluster_id = len(clusters)
        assigned[i] = cluster_id
        members = [i]
        queue = deque([i])
        while queue:
            p = queue.popleft()
            for q in neighbours[p]:
                if assigned[q] != -1:
                    continue
                assigned[q] = cluster_id
                members.append(int(q))
                if core[q]:
                    queue.append(q)

        members = tuple(sorted(members))
        clusters.append(Cluster(members, tuple(points[list(members)].mean(axis=0))))

    noise = set(int(i) for i in np.flatnonzero(assigned == -1))

    return clusters, noise


def characterize(windows):
    """Characterization statistics of a set of windows.

    Percentiles follow the nearest-rank rule.
    """

    assert windows

    vectors = np.array([w.feature_vector for w in windows], dtype=float)
    n = vectors.shape[0]

    per_feature = []
    for i in range(vectors.shape[1]):
        values = np.sort(vectors[:, i])
        if values[0] == values[-1]:
            v = float(values[0])
            per_feature.append(FeatureSummary(v, 0.0, v, v, v, v))
            continue

        mean = min(max(float(values.mean()), float(values[0])), float(values[-1]))
        std = float(values.std(ddof=1)) if n > 1 else 0.0
        per_feature.append(FeatureSummary(mean,
                                          std,
                                          float(values[0]),
                                          float(values[-1]),
                                          float(nearest_rank(values, 0.9)),
                                          float(nearest_rank(values, 0.75))))

    noise = [pool_stats([w.per_feature[i] for w in windows]).std for i in range(vectors.shape[1])]

    return WorkloadCharacterization.with_windows(per_feature, noise, [w.index for w in windows])


def characterization_scale(stored):
    """Per-feature scale for distances to a stored characterization."""

    return np.maximum(np.asarray(stored.noise, dtype=float), DefaultValues.STD_FLOOR)


def characterization_distance(a, b, scale=None):
    """Standardized L2 distance between the mean vectors of a and b.

    The default scale is the within-window noise of b.
    """

    if a.size != b.size:
        raise SchemaMismatch('Characterizations have %d and %d features.' % (a.size, b.size))

    if scale is None:
        scale = characterization_scale(b)

    return standardized_distance(a.means, b.means, scale)


def _welch_matches(c, stored, alpha_match):
    """True if no feature rejects equality of means."""

    if c.window_count < 2 or stored.window_count < 2:
        return False

    _t, _dof, reject, _degenerate = welch_tests(c.means, c.stds, c.window_count,
                                                stored.means, stored.stds, stored.window_count,
                                                alpha_match)
    return not np.any(reject)


def match_workload(c, db, alpha_match=DefaultValues.ALPHA_MATCH):
    """Label of the stored workload statistically indistinguishable from c.

    Synthetic records never match.
    """

    candidates = []
    for record in db.observed_records():
        if record.characterization.size != c.size:
            raise SchemaMismatch('Workload %d has a different feature schema.' % record.label)

        if _welch_matches(c, record.characterization, alpha_match):
            candidates.append((characterization_distance(c, record.characterization), record.label))

    if not candidates:
        return None

    return min(candidates)[1]


def nearest_workload(c, db, radius):
    """Nearest observed workload within radius of c, if any."""

    best = None
    for record in db.observed_records():
        d = characterization_distance(c, record.characterization)
        if d <= radius and (best is None or (d, record.label) < best):
            best = (d, record.label)

    return best[1] if best else None


def detect_drift(new, stored, epsilon, scale=None):
    """Determine if the mean vectors of two characterizations differ by more than epsilon.

    Parameters
    ----------
    new : WorkloadCharacterization
        Characterization from the current batch.
    stored : WorkloadCharacterization
        Characterization held in the WorkloadDB.
    epsilon : float
        Drift threshold in standardized units.
    scale : array_like
        Per-feature standardization scale; defaults to the pooled
        within-window noise of the stored characterization.
    """

    return characterization_distance(new, stored, scale) > epsilon


def generate_label(db):
    return db.next_label()


def discover(batch, db, params=None):
    """Identify workloads in a batch of observation windows.

    Transition windows are removed, the remaining windows are
    clustered and each cluster is matched against the WorkloadDB.
    Matched clusters are checked for drift; unmatched clusters
    become new workloads without a configuration.

    Parameters
    ----------
    batch : list of ObservationWindow
        Consecutive windows of one discovery batch.
    db : WorkloadDB
        Database updated in place.
    params : DiscoveryParams
        Clustering, matching and drift settings.

    Returns
    -------
    DiscoveryReport
        Labels identified in the batch.
    """

    logger = logging.getLogger('timestamp')

    if params is None:
        params = DiscoveryParams()

    if len(batch) < max(params.min_pts, 2):
        raise TooFewWindows('Discovery requires at least %d windows, batch has %d.' % (max(params.min_pts, 2), len(batch)))

    report = DiscoveryReport(batch_range=(batch[0].index, batch[-1].index))

    transitions = detect_batch(batch, params.policy)
    report.transition_windows = sorted(transitions)
    steady = [w for w in batch if w.index not in transitions]
    if not steady:
        logger.warning('Batch %d-%d holds only transition windows.' % report.batch_range)
        return report

    vectors = np.array([w.feature_vector for w in steady], dtype=float)
    within_std = np.median(np.array([w.stds for w in steady]), axis=0)
    loc, scale = zscore_scales(vectors, params.noise_floor * within_std)
    clusters, noise = dbscan(standardize(vectors, loc, scale), params.eps, params.min_pts)
    report.noise_window_count = len(noise)

    seen = set()
    for cluster in clusters:
        members = [steady[pos] for pos in cluster.members]
        assert not any(w.index in transitions for w in members)

        c = characterize(members)
        label = match_workload(c, db, params.alpha_match)
        if label is None:
            label = nearest_workload(c, db, params.match_radius)

        if label is None:
            label = generate_label(db)
            db.upsert(WorkloadRecord(label, c))
            report.new_labels.append(label)
            logger.info('Identified new workload %d from %d windows.' % (label, len(members)))
        elif label not in seen:
            stored = db.get(label)
            if detect_drift(c, stored.characterization, params.epsilon_drift):
                db.mark_drifted(label, c)
                report.drifting_labels.append(label)
                logger.info('Workload %d is drifting.' % label)
            else:
                report.matched_labels.append(label)

        seen.add(label)
        for w in members:
            report.assignments[w.index] = label

        report.clusters.append({'label': label,
                                'centroid': [float(v) for v in c.means],
                                'windows': index_ranges([w.index for w in members])})

    return report


class WorkloadDiscovery(object):
    """Run discovery over window batches held in a knowledge base."""

    def __init__(self, kb, params=None):
        """Initialization.

        Parameters
        ----------
        kb : KnowledgeBase
            Knowledge base holding window streams and the WorkloadDB.
        params : DiscoveryParams
            Clustering, matching and drift settings.
        """

        self.logger = logging.getLogger('timestamp')

        self.kb = kb
        self.params = params if params else DiscoveryParams()

    def run(self, batch):
        """Discover workloads in batch and tag its windows."""

        report = discover(batch, self.kb.workload_db, self.params)

        self.kb.append_many(DefaultValues.ANALYTICS_ZONE,
                            DefaultValues.WINDOW_LABEL_STREAM,
                            [{'index': idx, 'label': label} for idx, label in sorted(report.assignments.items())])
        self.kb.append_stream(DefaultValues.ANALYTICS_ZONE,
                              DefaultValues.DISCOVERY_REPORT_STREAM,
                              report.to_record())

        self.logger.info('Batch %d-%d: %d new, %d matched, %d drifting, %d noise windows.' % (report.batch_range[0],
                                                                                             report.batch_range[1],
                                                                                             len(report.new_labels),
                                                                                             len(report.matched_labels),
                                                                                             len(report.drifting_labels),
                                                                                             report.noise_window_count))

        return report

    def run_stream(self, windows, batch_length):
        """Discover workloads in consecutive batches of a window sequence.

        A trailing batch shorter than minPts is skipped.
        """

        reports = []
        for start in range(0, len(windows), batch_length):
            batch = windows[start:start + batch_length]
            if len(batch) < max(self.params.min_pts, 2):
                self.logger.warning('Skipping short batch of %d windows.' % len(batch))
                continue
            reports.append(self.run(batch))

        return reports
