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

"""Low-overhead configuration search over a discrete configuration space."""

import math
import logging
from dataclasses import dataclass, field


class BudgetExhausted(Exception):
    """Raised internally when a search has used all of its probes."""
    pass


@dataclass
class SearchResult:
    config: object
    objective: float
    probes: int
    trace: list = field(default_factory=list)
    budget_exhausted: bool = False
    kind: str = 'global'

    def to_record(self):
        return {'kind': self.kind,
                'config': self.config.to_record(),
                'objective': self.objective if math.isfinite(self.objective) else None,
                'probes': self.probes,
                'budget_exhausted': self.budget_exhausted,
                'trace': [[c.to_record(), v] for c, v in self.trace]}


class Explorer(object):
    """Coordinate-descent search over the domain indices of each parameter.

    Every configuration is evaluated at most once per search.
    """

    def __init__(self, space, objective, budget):
        """Initialization.

        Parameters
        ----------
        space : ConfigSpace
            Parameters and their ordered domains.
        objective : callable
            Maps a Configuration to a cost, lower is better.
        budget : int
            Maximum number of objective evaluations.
        """

        self.logger = logging.getLogger('timestamp')

        self.space = space
        self.objective = objective
        self.budget = budget

        self.memo = {}
        self.trace = []

    def _evaluate(self, indices):
        indices = tuple(indices)
        if indices in self.memo:
            return self.memo[indices]

        if len(self.trace) >= self.budget:
            raise BudgetExhausted()

        config = self.space.config_at(indices)
        value = float(self.objective(config))
        self.memo[indices] = value
        self.trace.append((config, value))

        return value

    def _best(self):
        """Configuration with the smallest objective; earliest probe wins ties."""

        best_config, best_value = self.trace[0]
        for config, value in self.trace[1:]:
            if value < best_value:
                best_config, best_value = config, value

        return best_config, best_value

    def _result(self, kind, exhausted):
        config, value = self._best()
        return SearchResult(config, value, len(self.trace), list(self.trace), exhausted, kind)

    def _line_search(self, current, current_value):
        """Best value of each parameter in turn over its full domain."""

        improved = False
        for p, size in enumerate(self.space.dimensions):
            best_idx = current[p]
            best_value = current_value
            for idx in range(size):
                candidate = list(current)
                candidate[p] = idx
                value = self._evaluate(candidate)
                if value < best_value:
                    best_idx, best_value = idx, value

            if best_idx != current[p]:
                current = list(current)
                current[p] = best_idx
                current_value = best_value
                improved = True

        return current, current_value, improved

    def global_search(self):
        """Coarse sweep from the default followed by coordinate descent."""

        assert self.budget >= 1

        default = list(self.space.indices(self.space.default))
        try:
            default_value = self._evaluate(default)

            # coarse sweep of endpoints and midpoint of each parameter
            start = list(default)
            for p, size in enumerate(self.space.dimensions):
                best_value = default_value
                for idx in sorted(set([0, (size - 1) // 2, size - 1])):
                    candidate = list(default)
                    candidate[p] = idx
                    value = self._evaluate(candidate)
                    if value < best_value:
                        start[p], best_value = idx, value

            self._evaluate(start)
            best_config, best_value = self._best()
            current = list(self.space.indices(best_config))

            improved = True
            while improved:
                current, best_value, improved = self._line_search(current, best_value)
        except BudgetExhausted:
            self.logger.info('Global search used its budget of %d probes.' % self.budget)
            return self._result('global', True)

        return self._result('global', False)

    def local_search(self, start):
        """Steepest descent over +/-1 domain-index neighbours of start."""

        if self.budget < 1:
            return SearchResult(start, math.inf, 0, [], True, 'local')

        current = list(self.space.indices(start))
        try:
            current_value = self._evaluate(current)
            while True:
                best = None
                for p, size in enumerate(self.space.dimensions):
                    for step in (-1, 1):
                        idx = current[p] + step
                        if 0 <= idx < size:
                            candidate = list(current)
                            candidate[p] = idx
                            value = self._evaluate(candidate)
                            if value < current_value and (best is None or value < best[1]):
                                best = (candidate, value)

                if best is None:
                    break
                current, current_value = best
        except BudgetExhausted:
            self.logger.info('Local search used its budget of %d probes.' % self.budget)
            return self._result('local', True)

        return self._result('local', False)


def global_search(objective, space, budget):
    return Explorer(space, objective, budget).global_search()


def local_search(objective, space, start, budget):
    return Explorer(space, objective, budget).local_search(start)
