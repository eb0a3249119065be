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

"""Observation, analytic and rate-of-change window streams."""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.exceptions import (EmptyWindow,
                                   InvalidRecord,
                                   NonConsecutive,
                                   OutOfSpan,
                                   SchemaMismatch)


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature identifiers of the telemetry vector."""

    names: Tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise SchemaMismatch('Feature schema must contain at least one feature.')
        if len(set(self.names)) != len(self.names):
            raise SchemaMismatch('Feature names must be unique: %s' % ','.join(self.names))

    @property
    def size(self):
        return len(self.names)

    @classmethod
    def default(cls):
        return cls(tuple(DefaultValues.FEATURES))


@dataclass(frozen=True)
class RawSample:
    timestamp: float
    source_id: str
    values: Tuple[float, ...]

    def to_line(self):
        return ','.join(['%r' % float(self.timestamp), self.source_id] + ['%r' % float(v) for v in self.values])

    @classmethod
    def from_line(cls, line, schema):
        """Parse a `ts,source_id,v1,...,vF` record."""

        line_split = line.strip().split(',')
        if len(line_split) != schema.size + 2:
            raise InvalidRecord('Expected %d values in sample: %s' % (schema.size, line.strip()))

        try:
            timestamp = float(line_split[0])
            values = tuple(float(v) for v in line_split[2:])
        except ValueError:
            raise InvalidRecord('Non-numeric sample: %s' % line.strip())

        if not math.isfinite(timestamp):
            raise InvalidRecord('Sample timestamp is not finite: %s' % line.strip())

        return cls(timestamp, line_split[1], values)


@dataclass(frozen=True)
class SampleStats:
    mean: float
    std: float
    n: int
    min: float
    max: float

    @classmethod
    def from_values(cls, values):
        return column_stats(np.asarray(values, dtype=float).reshape(-1, 1))[0]

    def to_record(self):
        return [self.mean, self.std, self.n, self.min, self.max]

    @classmethod
    def from_record(cls, record):
        mean, std, n, vmin, vmax = record
        return cls(float(mean), float(std), int(n), float(vmin), float(vmax))


def column_stats(values):
    """Sample statistics of each column of a sample matrix.

    Parameters
    ----------
    values : numpy.ndarray
        Matrix with one row per sample and one column per feature.

    Returns
    -------
    tuple
        SampleStats for each column.
    """

    n = values.shape[0]
    means = values.mean(axis=0)
    mins = values.min(axis=0)
    maxs = values.max(axis=0)
    if n > 1:
        stds = values.std(axis=0, ddof=1)
    else:
        stds = np.zeros(values.shape[1])

    stats = []
    for i in range(values.shape[1]):
        if mins[i] == maxs[i]:
            # constant column
            stats.append(SampleStats(float(mins[i]), 0.0, n, float(mins[i]), float(maxs[i])))
        else:
            mean = min(max(float(means[i]), float(mins[i])), float(maxs[i]))
            stats.append(SampleStats(mean, float(stds[i]), n, float(mins[i]), float(maxs[i])))

    return tuple(stats)


def pool_stats(stats_list):
    """Merge statistics of disjoint sample batches.

    Uses the pairwise update for means and sums of squared
    deviations, so the result equals statistics computed over
    the concatenated samples.
    """

    n = 0
    mean = 0.0
    m2 = 0.0
    vmin = math.inf
    vmax = -math.inf
    for s in stats_list:
        if s.n == 0:
            continue

        total = n + s.n
        delta = s.mean - mean
        mean = mean + delta * s.n / total
        m2 = m2 + s.std ** 2 * (s.n - 1) + delta ** 2 * n * s.n / total
        n = total
        vmin = min(vmin, s.min)
        vmax = max(vmax, s.max)

    if n == 0:
        raise EmptyWindow('Cannot pool statistics of empty batches.')

    if vmin == vmax:
        return SampleStats(vmin, 0.0, n, vmin, vmax)

    std = math.sqrt(max(m2, 0.0) / (n - 1)) if n > 1 else 0.0
    return SampleStats(min(max(mean, vmin), vmax), std, n, vmin, vmax)


@dataclass(frozen=True)
class ObservationWindow:
    index: int
    start: float
    end: float
    per_feature: Tuple[SampleStats, ...]

    @property
    def feature_vector(self):
        return tuple(s.mean for s in self.per_feature)

    @property
    def means(self):
        return np.array([s.mean for s in self.per_feature])

    @property
    def stds(self):
        return np.array([s.std for s in self.per_feature])

    @property
    def counts(self):
        return np.array([s.n for s in self.per_feature])

    def to_record(self):
        return {'index': self.index,
                'start': self.start,
                'end': self.end,
                'stats': [s.to_record() for s in self.per_feature]}

    @classmethod
    def from_record(cls, record):
        return cls(int(record['index']),
                   float(record['start']),
                   float(record['end']),
                   tuple(SampleStats.from_record(r) for r in record['stats']))


@dataclass(frozen=True)
class AnalyticWindow:
    index: int
    features: Tuple[float, ...]

    def to_record(self):
        return {'index': self.index, 'features': list(self.features)}

    @classmethod
    def from_record(cls, record):
        return cls(int(record['index']), tuple(float(v) for v in record['features']))


@dataclass(frozen=True)
class RateWindow:
    index: int
    deltas: Tuple[float, ...]

    def to_record(self):
        return {'index': self.index, 'deltas': list(self.deltas)}

    @classmethod
    def from_record(cls, record):
        return cls(int(record['index']), tuple(float(v) for v in record['deltas']))


def window_from_values(values, t, span):
    """Build an observation window from a sample matrix."""

    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] == 0:
        raise EmptyWindow('No samples for observation window %d.' % t)

    start, end = span
    return ObservationWindow(t, float(start), float(end), column_stats(values))


def aggregate_window(samples, schema, t, span):
    """Aggregate raw samples from all agents into observation window t.

    Parameters
    ----------
    samples : list of RawSample
        Samples with timestamps in [start, end).
    schema : FeatureSchema
        Feature layout of each sample.
    t : int
        Window index.
    span : (float, float)
        Start and end of the window.

    Returns
    -------
    ObservationWindow
        Pooled per-feature statistics.
    """

    if not samples:
        raise EmptyWindow('No samples for observation window %d.' % t)

    start, end = span
    values = []
    for sample in samples:
        if not (start <= sample.timestamp < end):
            raise OutOfSpan('Sample at %.3f outside window %d [%.3f, %.3f).' % (sample.timestamp, t, start, end))
        if len(sample.values) != schema.size:
            raise SchemaMismatch('Sample from %s has %d values, expected %d.' % (sample.source_id,
                                                                                len(sample.values),
                                                                                schema.size))
        values.append(sample.values)

    return window_from_values(values, t, span)


def to_analytic_window(o):
    """Analytic window matching an observation window."""

    return AnalyticWindow(o.index, o.feature_vector)


def rate_transform(prev, curr):
    """First difference of two consecutive analytic windows."""

    if curr.index != prev.index + 1:
        raise NonConsecutive('Windows %d and %d are not consecutive.' % (prev.index, curr.index))

    return RateWindow(curr.index, tuple(c - p for p, c in zip(prev.features, curr.features)))


class WindowAssembler(object):
    """Assemble time-ordered raw samples into consecutive observation windows."""

    def __init__(self, schema, window_length, origin=0.0):
        """Initialization.

        Parameters
        ----------
        schema : FeatureSchema
            Feature layout of samples.
        window_length : float
            Duration of each window in seconds.
        origin : float
            Start time of window 0.
        """

        self.logger = logging.getLogger('timestamp')

        self.schema = schema
        self.window_length = window_length
        self.origin = origin

        self.next_index = 0
        self.buffer = []
        self.prev_window = None
        self.rejected = 0
        self.substituted = 0

    def span(self, t):
        start = self.origin + t * self.window_length
        return (start, start + self.window_length)

    def add(self, sample):
        """Buffer a sample; samples older than the open window are rejected."""

        start, _end = self.span(self.next_index)
        if sample.timestamp < start:
            self.rejected += 1
            self.logger.warning('Rejecting late sample from %s at %.3f.' % (sample.source_id, sample.timestamp))
            return False

        self.buffer.append(sample)
        return True

    def advance(self, now):
        """Close every window that ends at or before now."""

        closed = []
        while self.span(self.next_index)[1] <= now:
            t = self.next_index
            span = self.span(t)

            in_window = [s for s in self.buffer if s.timestamp < span[1]]
            self.buffer = [s for s in self.buffer if s.timestamp >= span[1]]

            if in_window:
                window = aggregate_window(in_window, self.schema, t, span)
            elif self.prev_window is not None:
                self.substituted += 1
                self.logger.warning('No telemetry for window %d; substituting window %d.' % (t, self.prev_window.index))
                window = ObservationWindow(t, span[0], span[1], self.prev_window.per_feature)
            else:
                raise EmptyWindow('No samples for observation window %d.' % t)

            self.prev_window = window
            self.next_index += 1
            closed.append(window)

        return closed
