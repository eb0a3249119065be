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

"""Declarative scenarios for the synthetic cluster.

A scenario is a YAML document:

  version: 1
  name: three_plateaus
  seed: 11
  window_length: 10.0        # seconds per observation window
  sample_interval: 1.0       # seconds between samples of one agent
  agents: 2
  features: [...]            # optional, defaults to the standard schema
  config_space:
    parameters:
      - {name: map_slots, values: [1, 2, 4, 8, 16]}
    default: {map_slots: 1}
  rule_of_thumb: {...}       # optional, defaults to the mid-grid configuration
  classes:
    - name: wordcount
      mean: [...]            # one value per feature
      noise: [...]           # per-feature sample std, or a single value
      optimal: {map_slots: 8}
      base_runtime: 120.0
      weights: {map_slots: 4.0}   # or a single value
      runtime_noise: 0.0     # runtime std as a fraction of base_runtime
  schedule:
    - {class: wordcount, windows: 60}
    - {hybrid: [wordcount, terasort], windows: 40, transition: 2}
    - {drift: wordcount, shift: [...], windows: 40, optimal: {...}}
  repeat: 1
  detection: {alpha: 0.05}   # optional loop settings, see config.py

A segment's transition width is the number of leading windows
that ramp linearly from the previous segment's mean.
"""

import os
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import yaml
import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.windowing import FeatureSchema
from workloadtk.knowledge_base import ConfigSpace, Configuration
from workloadtk.exceptions import InvalidScenario, SchemaMismatch, WorkloadTkError


SETTING_SECTIONS = ('detection', 'discovery', 'classification', 'prediction', 'optimizer')
MIN_SEGMENT_WINDOWS = 3
MAX_TRANSITION_WIDTH = 3
MAX_RUNTIME_NOISE = 0.01
MIN_CLASS_SEPARATION = 10.0


@dataclass(frozen=True)
class RuntimeModel:
    """Separable quadratic-in-index job runtime of a workload."""

    base: float
    optimal: Tuple[int, ...]
    weights: Tuple[float, ...]
    noise: float = 0.0

    def expected(self, indices, dimensions):
        r = self.base
        for idx, opt, w, size in zip(indices, self.optimal, self.weights, dimensions):
            r *= 1.0 + w * ((idx - opt) / float(size)) ** 2
        return r


@dataclass(frozen=True)
class WorkloadClass:
    name: str
    mean: Tuple[float, ...]
    noise: Tuple[float, ...]
    runtime: RuntimeModel


@dataclass(frozen=True)
class Segment:
    kind: str
    classes: Tuple[str, ...]
    windows: int
    transition: int = 1
    shift: Optional[Tuple[float, ...]] = None
    optimal: Optional[Tuple[int, ...]] = None

    @property
    def truth(self):
        return '+'.join(self.classes)


@dataclass
class Scenario:
    name: str
    seed: int
    window_length: float
    sample_interval: float
    agents: int
    schema: FeatureSchema
    space: ConfigSpace
    rule_of_thumb: Configuration
    classes: dict
    schedule: list
    repeat: int
    settings: dict

    @property
    def num_windows(self):
        return sum(s.windows for s in self.schedule) * self.repeat

    @property
    def samples_per_window(self):
        return int(math.floor(self.window_length / self.sample_interval + 1e-9))

    def truth_types(self):
        """Ground-truth workload types in order of first appearance."""

        types = []
        for s in self.schedule:
            if s.truth not in types:
                types.append(s.truth)
        return types

    def type_mean(self, truth):
        return np.mean([self.classes[c].mean for c in truth.split('+')], axis=0)


def _vector(value, size, what):
    if isinstance(value, (int, float)):
        return tuple([float(value)] * size)

    if not isinstance(value, list) or len(value) != size:
        raise InvalidScenario('%s must be a number or a list of %d numbers.' % (what, size))

    return tuple(float(v) for v in value)


def _config_indices(space, values, what):
    if not isinstance(values, dict):
        raise InvalidScenario('%s must map every parameter to a value.' % what)

    try:
        config = Configuration.from_dict(values, space.names)
    except KeyError as e:
        raise InvalidScenario('%s is missing parameter %s.' % (what, e))

    if not space.contains(config):
        raise InvalidScenario('%s is not in the configuration space.' % what)

    return space.indices(config)


def _parse_class(record, schema, space):
    try:
        name = str(record['name'])
        mean = _vector(record['mean'], schema.size, 'Mean of class %s' % name)
        noise = _vector(record.get('noise', 0.0), schema.size, 'Noise of class %s' % name)
        optimal = _config_indices(space, record['optimal'], 'Optimum of class %s' % name)
        base = float(record['base_runtime'])
        weights = record.get('weights', 1.0)
        runtime_noise = float(record.get('runtime_noise', 0.0))
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidScenario('Invalid workload class: %s' % e)

    if isinstance(weights, dict):
        try:
            weights = tuple(float(weights[p]) for p in space.names)
        except KeyError as e:
            raise InvalidScenario('Class %s has no weight for parameter %s.' % (name, e))
    else:
        weights = tuple([float(weights)] * len(space.names))

    if base <= 0 or any(w <= 0 for w in weights):
        raise InvalidScenario('Class %s needs a positive base runtime and weights.' % name)
    if not (0 <= runtime_noise <= MAX_RUNTIME_NOISE):
        raise InvalidScenario('Runtime noise of class %s must be within [0, %.2f].' % (name, MAX_RUNTIME_NOISE))
    if any(n < 0 for n in noise):
        raise InvalidScenario('Noise of class %s must be non-negative.' % name)

    return WorkloadClass(name, mean, noise, RuntimeModel(base, optimal, weights, runtime_noise))


def _parse_segment(record, classes, schema, space):
    if not isinstance(record, dict):
        raise InvalidScenario('Schedule entries must be mappings.')

    try:
        windows = int(record['windows'])
    except (KeyError, TypeError, ValueError):
        raise InvalidScenario('Every schedule segment needs a window count.')

    transition = int(record.get('transition', 1))

    if 'class' in record:
        kind = 'class'
        names = (str(record['class']),)
    elif 'hybrid' in record:
        kind = 'hybrid'
        names = tuple(str(c) for c in record['hybrid'])
        if len(names) != 2 or names[0] == names[1]:
            raise InvalidScenario('A hybrid segment mixes exactly two distinct classes.')
    elif 'drift' in record:
        kind = 'drift'
        names = (str(record['drift']),)
    else:
        raise InvalidScenario('Schedule segment must name a class, hybrid or drift.')

    for name in names:
        if name not in classes:
            raise InvalidScenario('Schedule refers to unknown class %s.' % name)

    if windows < MIN_SEGMENT_WINDOWS:
        raise InvalidScenario('Segments must span at least %d windows.' % MIN_SEGMENT_WINDOWS)
    if not (1 <= transition <= MAX_TRANSITION_WIDTH) or transition >= windows:
        raise InvalidScenario('Transition width must be 1 to %d windows and shorter than its segment.' % MAX_TRANSITION_WIDTH)

    shift = None
    optimal = None
    if kind == 'drift':
        shift = _vector(record.get('shift', 0.0), schema.size, 'Drift shift')
        if 'optimal' in record:
            optimal = _config_indices(space, record['optimal'], 'Drift optimum')

    return Segment(kind, names, windows, transition, shift, optimal)


def _check_separation(classes):
    names = sorted(classes)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            ca = classes[a]
            cb = classes[b]
            pooled = np.sqrt((np.array(ca.noise) ** 2 + np.array(cb.noise) ** 2) / 2.0)
            gap = np.abs(np.array(ca.mean) - np.array(cb.mean))
            if not np.any(gap >= MIN_CLASS_SEPARATION * pooled) or not np.any(gap > 0):
                raise InvalidScenario('Classes %s and %s are less than %d pooled standard deviations apart.' % (a, b, MIN_CLASS_SEPARATION))


def parse_scenario(record):
    """Build a Scenario from a parsed YAML document."""

    if not isinstance(record, dict):
        raise InvalidScenario('Scenario must be a mapping.')

    if record.get('version', DefaultValues.SCENARIO_VERSION) != DefaultValues.SCENARIO_VERSION:
        raise InvalidScenario('Unsupported scenario version: %s' % record.get('version'))

    known = set(['version', 'name', 'seed', 'window_length', 'sample_interval', 'agents', 'features',
                 'config_space', 'rule_of_thumb', 'classes', 'schedule', 'repeat', 'allow_overlap'])
    known.update(SETTING_SECTIONS)
    unknown = set(record) - known
    if unknown:
        raise InvalidScenario('Unknown scenario keys: %s' % ', '.join(sorted(unknown)))

    try:
        schema = FeatureSchema(tuple(record.get('features', DefaultValues.FEATURES)))
    except SchemaMismatch as e:
        raise InvalidScenario(str(e))

    if 'config_space' not in record or 'classes' not in record or 'schedule' not in record:
        raise InvalidScenario('Scenario requires config_space, classes and schedule.')

    space = ConfigSpace.from_record(record['config_space'])
    if 'rule_of_thumb' in record:
        rule_of_thumb = space.config_at(_config_indices(space, record['rule_of_thumb'], 'Rule-of-thumb configuration'))
    else:
        rule_of_thumb = space.midpoint()

    classes = {}
    for r in record['classes']:
        c = _parse_class(r, schema, space)
        if c.name in classes:
            raise InvalidScenario('Duplicate class %s.' % c.name)
        classes[c.name] = c

    if not record.get('allow_overlap', False):
        _check_separation(classes)

    schedule = [_parse_segment(r, classes, schema, space) for r in record['schedule']]
    if not schedule:
        raise InvalidScenario('Scenario schedule is empty.')

    settings = {}
    for section in SETTING_SECTIONS:
        value = record.get(section, {}) or {}
        if not isinstance(value, dict):
            raise InvalidScenario('Scenario section %s must be a mapping.' % section)
        settings[section] = value

    try:
        scenario = Scenario(str(record.get('name', 'scenario')),
                            int(record.get('seed', 0)),
                            float(record.get('window_length', DefaultValues.WINDOW_LENGTH)),
                            float(record.get('sample_interval', DefaultValues.SAMPLE_INTERVAL)),
                            int(record.get('agents', 1)),
                            schema,
                            space,
                            rule_of_thumb,
                            classes,
                            schedule,
                            int(record.get('repeat', 1)),
                            settings)
    except (TypeError, ValueError) as e:
        raise InvalidScenario('Invalid scenario value: %s' % e)

    if scenario.window_length <= 0 or scenario.sample_interval <= 0 or scenario.samples_per_window < 2:
        raise InvalidScenario('A window must hold at least 2 samples of each agent.')
    if scenario.agents < 1 or scenario.repeat < 1:
        raise InvalidScenario('Scenario needs at least one agent and one repetition.')

    return scenario


def load_scenario(scenario_file):
    """Read a scenario file."""

    if not os.path.exists(scenario_file):
        raise InvalidScenario('Scenario file does not exist: %s' % scenario_file)

    try:
        with open(scenario_file) as f:
            record = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise InvalidScenario('Unable to parse scenario %s: %s' % (scenario_file, e))

    try:
        return parse_scenario(record)
    except InvalidScenario:
        raise
    except WorkloadTkError as e:
        raise InvalidScenario(str(e))


def bundled_scenarios():
    scenario_dir = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'scenarios')
    return {os.path.splitext(f)[0]: os.path.join(scenario_dir, f)
            for f in sorted(os.listdir(scenario_dir)) if f.endswith('.yaml')}


def resolve_scenario(name_or_path):
    """Path of a scenario file, accepting the name of a bundled scenario."""

    if os.path.exists(name_or_path):
        return name_or_path

    return bundled_scenarios().get(name_or_path, name_or_path)
