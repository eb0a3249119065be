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

import logging

from workloadtk.default_values import DefaultValues
from workloadtk.explorer import Explorer
from workloadtk.exceptions import NotFound


class PluginDecision(object):
    """Configuration chosen for one resource request and the branch that chose it."""

    def __init__(self, window_index, label, branch, probes, config):
        self.window_index = window_index
        self.label = label
        self.branch = branch
        self.probes = probes
        self.config = config

    def to_record(self):
        return {'window_index': self.window_index,
                'label': self.label,
                'branch': self.branch,
                'probes': self.probes,
                'config': self.config.to_record()}


class ConfigurationPlugin(object):
    """Choose the configuration for a resource request from the workload context.

    The decision order is: out-of-sync context, unknown workload,
    workload missing from the WorkloadDB, window in transition
    (stored optimal configuration or the default, never a search),
    stored optimal configuration, local search for a drifting workload with a
    stored configuration, and global search otherwise. Both
    searches store their result as the optimal configuration.
    Any failure falls back to the default configuration.
    """

    def __init__(self, db, space,
                 sync_tolerance,
                 budget_global=DefaultValues.GLOBAL_BUDGET,
                 budget_local=DefaultValues.LOCAL_BUDGET,
                 kb=None):
        """Initialization.

        Parameters
        ----------
        db : WorkloadDB
            Workload descriptors and stored configurations.
        space : ConfigSpace
            Tunable parameters and the default configuration.
        sync_tolerance : float
            Largest age in seconds of a usable workload context.
        budget_global : int
            Probe budget of a global search.
        budget_local : int
            Probe budget of a local search.
        kb : KnowledgeBase
            Knowledge base receiving search traces.
        """

        self.logger = logging.getLogger('timestamp')

        self.db = db
        self.space = space
        self.sync_tolerance = sync_tolerance
        self.budget_global = budget_global
        self.budget_local = budget_local
        self.kb = kb

        self.decisions = []

    def _decide(self, ctx, label, branch, config, probes=0):
        window_index = ctx.window_index if ctx else -1
        self.decisions.append(PluginDecision(window_index, label, branch, probes, config))
        return config

    def _search(self, ctx, record, objective):
        if record.is_drifting and record.config is not None:
            explorer = Explorer(self.space, objective, self.budget_local)
            result = explorer.local_search(record.config)
        else:
            explorer = Explorer(self.space, objective, self.budget_global)
            result = explorer.global_search()

        self.db.set_config(record.label, result.config, True)
        if record.is_drifting:
            self.db.set_drift(record.label, False)

        self.logger.info('Workload %d: %s search found %s in %d probes.' % (record.label,
                                                                          result.kind,
                                                                          result.config,
                                                                          result.probes))

        if self.kb:
            search_record = {'window_index': ctx.window_index, 'label': record.label}
            search_record.update(result.to_record())
            self.kb.append_stream(DefaultValues.ANALYTICS_ZONE, DefaultValues.SEARCH_STREAM, search_record)

        return self._decide(ctx, record.label, result.kind, result.config, result.probes)

    def main(self, ctx, now, objective):
        """Configuration for a resource request made at time now.

        Parameters
        ----------
        ctx : WorkloadContext
            Latest context emitted by the workload monitor.
        now : float
            Time of the resource request.
        objective : callable
            Measures the cost of a candidate configuration.

        Returns
        -------
        Configuration
            Configuration to apply.
        """

        default = self.space.default
        label = ctx.current_label if ctx else DefaultValues.UNKNOWN_LABEL

        try:
            if ctx is None or now - ctx.emitted_at > self.sync_tolerance:
                self.logger.error('Workload monitor and plug-in are out of sync; using the default configuration.')
                return self._decide(ctx, label, 'stale', default)

            if label == DefaultValues.UNKNOWN_LABEL:
                return self._decide(ctx, label, 'unknown', default)

            try:
                record = self.db.get(label)
            except NotFound:
                self.logger.warning('Workload %d is not in the WorkloadDB; using the default configuration.' % label)
                return self._decide(ctx, label, 'not_found', default)

            # the label of a transition window is its predecessor's; the job
            # belongs to the incoming workload and must not drive a search
            if ctx.in_transition:
                config = record.config if record.has_optimal_config else default
                return self._decide(ctx, label, 'transition', config)

            if record.has_optimal_config:
                return self._decide(ctx, label, 'optimal', record.config)

            return self._search(ctx, record, objective)
        except Exception as e:
            self.logger.error('Configuration search failed for workload %d: %s' % (label, e))
            return self._decide(ctx, label, 'error', default)


def plugin_main(ctx, now, db, space, objective,
                sync_tolerance,
                budget_global=DefaultValues.GLOBAL_BUDGET,
                budget_local=DefaultValues.LOCAL_BUDGET):
    plugin = ConfigurationPlugin(db, space, sync_tolerance, budget_global, budget_local)
    return plugin.main(ctx, now, objective)
