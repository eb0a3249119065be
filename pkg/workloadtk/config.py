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

"""Settings of the autonomic loop.

Values are layered: DefaultValues, then the optional sections of
the scenario file, then command-line flags.
"""

from dataclasses import dataclass, fields, replace

from workloadtk.default_values import DefaultValues
from workloadtk.change_detector import ChangePolicy
from workloadtk.discovery import DiscoveryParams
from workloadtk.classifiers.forest import ForestParams
from workloadtk.exceptions import InvalidScenario


SECTION_KEYS = {'detection': ('alpha', 'min_features_rejecting', 'correction'),
                'discovery': ('eps', 'min_pts', 'noise_floor', 'epsilon_drift',
                              'alpha_match', 'match_radius', 'batch_length'),
                'classification': ('n_trees', 'max_depth', 'min_leaf', 'transition_width',
                                   'include_steady', 'synthetic_instances'),
                'prediction': ('predictor_order', 'segment_length'),
                'optimizer': ('budget_global', 'budget_local', 'sync_tolerance_windows')}

FLAG_KEYS = {'windows_len': 'window_length',
             'alpha': 'alpha',
             'eps': 'eps',
             'epsilon_drift': 'epsilon_drift',
             'minpts': 'min_pts',
             'batch_len': 'batch_length',
             'budget_global': 'budget_global',
             'budget_local': 'budget_local',
             'cpus': 'cpus'}


@dataclass(frozen=True)
class LoopSettings:
    window_length: float = DefaultValues.WINDOW_LENGTH

    alpha: float = DefaultValues.ALPHA
    min_features_rejecting: int = DefaultValues.MIN_FEATURES_REJECTING
    correction: str = DefaultValues.CORRECTION

    eps: float = DefaultValues.DBSCAN_EPS
    min_pts: int = DefaultValues.DBSCAN_MIN_PTS
    noise_floor: float = DefaultValues.DBSCAN_NOISE_FLOOR
    epsilon_drift: float = DefaultValues.DRIFT_EPSILON
    alpha_match: float = DefaultValues.ALPHA_MATCH
    match_radius: float = DefaultValues.MATCH_RADIUS
    batch_length: int = DefaultValues.BATCH_LENGTH

    n_trees: int = DefaultValues.N_TREES
    max_depth: int = DefaultValues.MAX_DEPTH
    min_leaf: int = DefaultValues.MIN_LEAF
    transition_width: int = DefaultValues.TRANSITION_WIDTH
    include_steady: bool = False
    synthetic_instances: int = DefaultValues.SYNTHETIC_INSTANCES

    predictor_order: int = DefaultValues.PREDICTOR_ORDER
    segment_length: int = DefaultValues.SEGMENT_LENGTH

    budget_global: int = DefaultValues.GLOBAL_BUDGET
    budget_local: int = DefaultValues.LOCAL_BUDGET
    sync_tolerance_windows: float = DefaultValues.SYNC_TOLERANCE_WINDOWS

    cpus: int = 1

    @classmethod
    def from_layers(cls, scenario=None, args=None):
        """Settings from defaults, scenario sections and parsed flags.

        Parameters
        ----------
        scenario : Scenario
            Scenario whose sections override the defaults.
        args : argparse.Namespace
            Flags overriding the scenario; unset flags are None.
        """

        settings = cls()

        if scenario is not None:
            settings = replace(settings, window_length=scenario.window_length)
            for section, values in scenario.settings.items():
                unknown = set(values) - set(SECTION_KEYS[section])
                if unknown:
                    raise InvalidScenario('Unknown keys in scenario section %s: %s' % (section, ', '.join(sorted(unknown))))
                settings = settings._override(values)

        if args is not None:
            values = {}
            for flag, key in FLAG_KEYS.items():
                value = getattr(args, flag, None)
                if value is not None:
                    values[key] = value
            settings = settings._override(values)

        settings.validate(scenario.schema.size if scenario is not None else None)

        return settings

    def _override(self, values):
        types = {f.name: f.type for f in fields(self)}
        converted = {}
        for key, value in values.items():
            try:
                if types[key] in (bool, 'bool'):
                    converted[key] = bool(value)
                elif types[key] in (int, 'int'):
                    converted[key] = int(value)
                elif types[key] in (float, 'float'):
                    converted[key] = float(value)
                else:
                    converted[key] = value
            except (TypeError, ValueError):
                raise InvalidScenario('Invalid value for %s: %s' % (key, value))

        return replace(self, **converted)

    def validate(self, num_features=None):
        """Check every setting; num_features bounds the m-of-F detection rule."""

        if not (0 < self.alpha < 1) or not (0 < self.alpha_match < 1):
            raise InvalidScenario('Significance levels must lie in (0, 1).')
        if self.correction not in ('none', 'bonferroni'):
            raise InvalidScenario('Unknown multiple-testing correction: %s' % self.correction)
        if self.min_features_rejecting < 1:
            raise InvalidScenario('At least one rejecting feature is required for a transition.')
        if num_features is not None and self.min_features_rejecting > num_features:
            raise InvalidScenario('min_features_rejecting is %d but the scenario has %d features.' % (self.min_features_rejecting,
                                                                                                 num_features))
        if self.eps <= 0 or self.min_pts < 1 or self.epsilon_drift < 0:
            raise InvalidScenario('DBSCAN needs eps > 0 and minPts >= 1; drift threshold must be non-negative.')
        if self.batch_length < max(self.min_pts, 2):
            raise InvalidScenario('Batch length must cover at least minPts windows.')
        if self.window_length <= 0 or self.budget_global < 1 or self.budget_local < 0 or self.cpus < 1:
            raise InvalidScenario('Window length, search budgets and cpus must be positive.')
        if self.n_trees < 1 or self.max_depth < 1 or self.min_leaf < 1 or self.transition_width < 1:
            raise InvalidScenario('Forest and transition settings must be positive.')
        if self.predictor_order < 1 or self.segment_length < 1 or self.synthetic_instances < 1:
            raise InvalidScenario('Prediction and synthesis settings must be positive.')

    @property
    def sync_tolerance(self):
        """Largest context age in seconds the plug-in accepts."""

        return self.sync_tolerance_windows * self.window_length

    def change_policy(self):
        return ChangePolicy(self.alpha, self.min_features_rejecting, self.correction)

    def discovery_params(self):
        return DiscoveryParams(self.eps,
                               self.min_pts,
                               self.noise_floor,
                               self.epsilon_drift,
                               self.alpha_match,
                               self.match_radius,
                               self.change_policy())

    def forest_params(self):
        return ForestParams(self.n_trees, self.max_depth, self.min_leaf)

    def to_record(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'cpus'}
