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

"""Zoned workload knowledge base and the WorkloadDB.

The knowledge base is a directory with one sub-directory per zone:

  lz/  raw telemetry as received from agents
  tz/  observation, analytic and rate window streams
  az/  labels, contexts, search traces, training sets, models
       and the WorkloadDB

Every stream is an append-only file of one record per line. The
offset of a record is its line number, so a read from a given
offset is repeatable. The WorkloadDB is itself a line-delimited
file in which the last record written for a label wins; it is
compacted when loaded.
"""

import os
import logging
import itertools
import threading
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from biolib.common import make_sure_path_exists

from workloadtk.default_values import DefaultValues
from workloadtk.common import (encode_record,
                               read_records,
                               truncate_torn_tail,
                               index_ranges,
                               expand_ranges)
from workloadtk.windowing import RawSample
from workloadtk.exceptions import (NotFound,
                                   UnknownStream,
                                   InvalidRecord,
                                   InvalidScenario,
                                   SchemaMismatch)


@dataclass(frozen=True)
class Configuration:
    """Assignment of a value to every tunable parameter."""

    items: Tuple[Tuple[str, object], ...]

    def __getitem__(self, name):
        for key, value in self.items:
            if key == name:
                return value
        raise KeyError(name)

    def as_dict(self):
        return dict(self.items)

    def to_record(self):
        return [[key, value] for key, value in self.items]

    @classmethod
    def from_record(cls, record):
        return cls(tuple((str(key), value) for key, value in record))

    @classmethod
    def from_dict(cls, values, names):
        return cls(tuple((name, values[name]) for name in names))

    def __str__(self):
        return ','.join(['%s=%s' % (key, value) for key, value in self.items])


class ConfigSpace(object):
    """Ordered parameters, each with a finite ordered domain."""

    def __init__(self, parameters, default):
        """Initialization.

        Parameters
        ----------
        parameters : list of (str, list)
            Parameter names with their ordered domains.
        default : dict
            Default value of each parameter.
        """

        if not parameters:
            raise InvalidScenario('Configuration space declares no parameters.')

        self.parameters = tuple((name, tuple(domain)) for name, domain in parameters)
        self.names = tuple(name for name, _ in self.parameters)
        if len(set(self.names)) != len(self.names):
            raise InvalidScenario('Configuration space has duplicate parameter names.')

        for name, domain in self.parameters:
            if not domain:
                raise InvalidScenario('Parameter %s has an empty domain.' % name)

        missing = set(self.names) - set(default)
        if missing:
            raise InvalidScenario('Default configuration is missing: %s' % ', '.join(sorted(missing)))

        self.default = Configuration.from_dict(default, self.names)
        if not self.contains(self.default):
            raise InvalidScenario('Default configuration is not in the configuration space.')

    @classmethod
    def from_record(cls, record):
        """Parse the `config_space` section of a scenario."""

        try:
            parameters = [(p['name'], p['values']) for p in record['parameters']]
            default = record['default']
        except (KeyError, TypeError):
            raise InvalidScenario('Configuration space requires parameters and a default.')

        return cls(parameters, default)

    def to_record(self):
        return {'parameters': [{'name': name, 'values': list(domain)} for name, domain in self.parameters],
                'default': self.default.as_dict()}

    @property
    def dimensions(self):
        return tuple(len(domain) for _, domain in self.parameters)

    def contains(self, config):
        if tuple(key for key, _ in config.items) != self.names:
            return False

        return all(value in domain for (_, value), (_, domain) in zip(config.items, self.parameters))

    def indices(self, config):
        """Domain index of each parameter value."""

        if not self.contains(config):
            raise InvalidRecord('Configuration %s is not in the configuration space.' % config)

        return tuple(domain.index(value) for (_, value), (_, domain) in zip(config.items, self.parameters))

    def config_at(self, indices):
        return Configuration(tuple((name, domain[idx]) for (name, domain), idx in zip(self.parameters, indices)))

    def midpoint(self):
        """Rule-of-thumb configuration in the middle of every domain."""

        return self.config_at([(len(domain) - 1) // 2 for _, domain in self.parameters])

    def all_configs(self):
        for indices in itertools.product(*[range(n) for n in self.dimensions]):
            yield self.config_at(indices)


@dataclass(frozen=True)
class FeatureSummary:
    mean: float
    std: float
    min: float
    max: float
    p90: float
    p75: float

    def to_record(self):
        return [self.mean, self.std, self.min, self.max, self.p90, self.p75]

    @classmethod
    def from_record(cls, record):
        return cls(*[float(v) for v in record])


@dataclass(frozen=True)
class WorkloadCharacterization:
    """Summary statistics of the windows forming a workload.

    The noise vector holds the pooled per-sample standard deviation
    within the member windows and scales characterization distances.
    """

    per_feature: Tuple[FeatureSummary, ...]
    noise: Tuple[float, ...]
    window_count: int
    window_ids: Tuple[Tuple[int, int], ...] = ()

    @property
    def means(self):
        return np.array([s.mean for s in self.per_feature])

    @property
    def stds(self):
        return np.array([s.std for s in self.per_feature])

    @property
    def size(self):
        return len(self.per_feature)

    @property
    def windows(self):
        return expand_ranges(self.window_ids)

    def validate(self, synthetic=False):
        if self.window_count < 1 and not synthetic:
            raise InvalidRecord('Observed characterization must cover at least one window.')
        if len(self.noise) != len(self.per_feature):
            raise SchemaMismatch('Characterization noise does not match the feature count.')

        for s in self.per_feature:
            if not (s.min <= s.p75 <= s.p90 <= s.max):
                raise InvalidRecord('Characterization percentiles out of order.')
            if s.std < 0:
                raise InvalidRecord('Characterization has a negative standard deviation.')

    def to_record(self):
        return {'stats': [s.to_record() for s in self.per_feature],
                'noise': list(self.noise),
                'window_count': self.window_count,
                'window_ids': [list(r) for r in self.window_ids]}

    @classmethod
    def from_record(cls, record):
        return cls(tuple(FeatureSummary.from_record(r) for r in record['stats']),
                   tuple(float(v) for v in record['noise']),
                   int(record['window_count']),
                   tuple(tuple(int(v) for v in r) for r in record['window_ids']))

    @classmethod
    def with_windows(cls, per_feature, noise, indices):
        return cls(tuple(per_feature), tuple(noise), len(indices),
                   tuple(tuple(r) for r in index_ranges(indices)))


@dataclass(frozen=True)
class WorkloadRecord:
    label: int
    characterization: WorkloadCharacterization
    has_optimal_config: bool = False
    is_drifting: bool = False
    config: Optional[Configuration] = None
    is_synthetic: bool = False
    parents: Optional[Tuple[int, int]] = None

    def validate(self):
        if self.label <= 0:
            raise InvalidRecord('Workload labels must be positive: %d' % self.label)
        if self.has_optimal_config and self.config is None:
            raise InvalidRecord('Workload %d is flagged optimal without a configuration.' % self.label)

        self.characterization.validate(self.is_synthetic)

    def to_record(self):
        return {'label': self.label,
                'is_synthetic': self.is_synthetic,
                'has_optimal_config': self.has_optimal_config,
                'is_drifting': self.is_drifting,
                'config': self.config.to_record() if self.config is not None else None,
                'parents': list(self.parents) if self.parents else None,
                'characterization': self.characterization.to_record()}

    @classmethod
    def from_record(cls, record):
        try:
            return cls(int(record['label']),
                       WorkloadCharacterization.from_record(record['characterization']),
                       bool(record['has_optimal_config']),
                       bool(record['is_drifting']),
                       Configuration.from_record(record['config']) if record['config'] is not None else None,
                       bool(record['is_synthetic']),
                       tuple(record['parents']) if record['parents'] else None)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidRecord('Malformed workload record: %s' % e)


class WorkloadDB(object):
    """Workload records keyed by label.

    Records are never deleted. Without a backing file the
    database lives in memory only.
    """

    def __init__(self, db_file=None):
        """Initialization.

        Parameters
        ----------
        db_file : str
            Line-delimited file backing the database.
        """

        self.logger = logging.getLogger('timestamp')

        self.db_file = db_file
        self.records = {}
        self.lock = threading.Lock()

        if db_file and os.path.exists(db_file):
            self._load()

    def _load(self):
        """Read all records, last writer wins, and compact the file."""

        for r in read_records(self.db_file):
            record = WorkloadRecord.from_record(r)
            record.validate()
            self.records[record.label] = record

        fout = open(self.db_file, 'w')
        for label in sorted(self.records):
            fout.write(encode_record(self.records[label].to_record()))
        fout.close()

        self.logger.info('Loaded %d workload records.' % len(self.records))

    def _persist(self, record):
        if self.db_file:
            with open(self.db_file, 'a') as fout:
                fout.write(encode_record(record.to_record()))

    def __len__(self):
        return len(self.records)

    def __contains__(self, label):
        return int(label) in self.records

    def labels(self):
        return sorted(self.records)

    def all_records(self):
        return [self.records[label] for label in sorted(self.records)]

    def observed_records(self):
        return [r for r in self.all_records() if not r.is_synthetic]

    def synthetic_records(self):
        return [r for r in self.all_records() if r.is_synthetic]

    def next_label(self):
        """Next integer label; 0 is reserved for unknown workloads."""

        if not self.records:
            return 1
        return max(self.records) + 1

    def upsert(self, record):
        """Insert or replace the record with the same label."""

        record.validate()
        with self.lock:
            if record.label in self.records and self.records[record.label] == record:
                return
            self.records[record.label] = record
            self._persist(record)

    def get(self, label):
        try:
            return self.records[int(label)]
        except KeyError:
            raise NotFound('Workload %d is not in the WorkloadDB.' % int(label))

    def set_config(self, label, config, optimal):
        record = self.get(label)
        self.upsert(replace(record, config=config, has_optimal_config=bool(optimal)))

    def set_drift(self, label, drifting):
        record = self.get(label)
        self.upsert(replace(record, is_drifting=bool(drifting)))

    def mark_drifted(self, label, characterization):
        """Record a drifted workload's new characterization.

        The stored configuration is kept as the start of a local
        search but is no longer flagged optimal.
        """

        record = self.get(label)
        self.upsert(replace(record,
                            characterization=characterization,
                            is_drifting=True,
                            has_optimal_config=False))


class KnowledgeBase(object):
    """Landing, transformation and analytics zones of append-only streams."""

    STREAMS = {DefaultValues.LANDING_ZONE: (),
               DefaultValues.TRANSFORMATION_ZONE: (DefaultValues.OBSERVATION_STREAM,
                                                   DefaultValues.ANALYTIC_STREAM,
                                                   DefaultValues.RATE_STREAM),
               DefaultValues.ANALYTICS_ZONE: (DefaultValues.CONTEXT_STREAM,
                                              DefaultValues.WINDOW_LABEL_STREAM,
                                              DefaultValues.TRANSITION_LABEL_STREAM,
                                              DefaultValues.DISCOVERY_REPORT_STREAM,
                                              DefaultValues.SEARCH_STREAM,
                                              DefaultValues.CLASS_DESCRIPTOR_STREAM)}

    def __init__(self, kb_dir):
        """Initialization.

        Parameters
        ----------
        kb_dir : str
            Root directory of the knowledge base.
        """

        self.logger = logging.getLogger('timestamp')

        self.kb_dir = kb_dir
        for zone in DefaultValues.ZONES:
            make_sure_path_exists(os.path.join(kb_dir, zone))

        self.streams = {zone: set(names) for zone, names in self.STREAMS.items()}
        self.lengths = {}
        self.locks = {}

        self.workload_db = WorkloadDB(self.path(DefaultValues.ANALYTICS_ZONE, DefaultValues.WORKLOAD_DB_FILE))

    def path(self, zone, filename):
        return os.path.join(self.kb_dir, zone, filename)

    def zone_dir(self, zone):
        if zone not in self.streams:
            raise UnknownStream('Unknown zone: %s' % zone)
        return os.path.join(self.kb_dir, zone)

    def create_stream(self, zone, stream_name):
        self.zone_dir(zone)
        self.streams[zone].add(stream_name)

    def _stream_file(self, zone, stream_name):
        if zone not in self.streams or stream_name not in self.streams[zone]:
            raise UnknownStream('Unknown stream %s/%s.' % (zone, stream_name))

        return self.path(zone, stream_name + DefaultValues.STREAM_EXTENSION)

    def stream_length(self, zone, stream_name):
        stream_file = self._stream_file(zone, stream_name)
        key = (zone, stream_name)
        if key not in self.lengths:
            if os.path.exists(stream_file):
                removed = truncate_torn_tail(stream_file)
                if removed:
                    self.logger.warning('Removed a partially written record of %d bytes from %s/%s.' % (removed,
                                                                                                       zone,
                                                                                                       stream_name))
                self.lengths[key] = len(read_records(stream_file))
            else:
                self.lengths[key] = 0

        return self.lengths[key]

    def append_stream(self, zone, stream_name, record):
        """Append a record and return its offset."""

        stream_file = self._stream_file(zone, stream_name)
        key = (zone, stream_name)
        lock = self.locks.setdefault(key, threading.Lock())

        with lock:
            offset = self.stream_length(zone, stream_name)
            with open(stream_file, 'a') as fout:
                fout.write(encode_record(record))
            self.lengths[key] = offset + 1

        return offset

    def append_many(self, zone, stream_name, records):
        """Append records in order; returns the offset of the first one."""

        stream_file = self._stream_file(zone, stream_name)
        key = (zone, stream_name)
        lock = self.locks.setdefault(key, threading.Lock())

        with lock:
            offset = self.stream_length(zone, stream_name)
            with open(stream_file, 'a') as fout:
                for record in records:
                    fout.write(encode_record(record))
            self.lengths[key] = offset + len(records)

        return offset

    def read_stream(self, zone, stream_name, from_offset=0):
        """All records with offset >= from_offset, in order."""

        stream_file = self._stream_file(zone, stream_name)
        if not os.path.exists(stream_file):
            return []

        return read_records(stream_file)[from_offset:]

    def append_raw(self, samples):
        """Land raw telemetry samples as `ts,source_id,v1,...,vF` lines."""

        raw_file = self.path(DefaultValues.LANDING_ZONE, DefaultValues.RAW_STREAM + DefaultValues.RAW_EXTENSION)
        key = (DefaultValues.LANDING_ZONE, DefaultValues.RAW_STREAM)
        lock = self.locks.setdefault(key, threading.Lock())

        with lock:
            with open(raw_file, 'a') as fout:
                for s in samples:
                    fout.write(s.to_line() + '\n')

    def read_raw(self, schema, from_offset=0):
        raw_file = self.path(DefaultValues.LANDING_ZONE, DefaultValues.RAW_STREAM + DefaultValues.RAW_EXTENSION)
        if not os.path.exists(raw_file):
            return []

        samples = []
        with open(raw_file) as f:
            for line in f:
                if not line.endswith('\n'):
                    break
                samples.append(RawSample.from_line(line, schema))

        return samples[from_offset:]
