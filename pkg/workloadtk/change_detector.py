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

"""Training-free change detector separating steady state from transitions."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from workloadtk.default_values import DefaultValues
from workloadtk.exceptions import (InsufficientSamples,
                                   InvalidPolicy,
                                   NonConsecutive,
                                   SchemaMismatch,
                                   TooFewWindows)


@dataclass(frozen=True)
class WelchResult:
    t_stat: float
    dof: float
    reject: bool
    feature_index: int
    degenerate: bool = False


@dataclass(frozen=True)
class ChangePolicy:
    alpha: float = DefaultValues.ALPHA
    min_features_rejecting: int = DefaultValues.MIN_FEATURES_REJECTING
    correction: str = DefaultValues.CORRECTION

    def __post_init__(self):
        if not (0 < self.alpha < 1):
            raise InvalidPolicy('alpha must lie in (0, 1), received %s.' % self.alpha)
        if self.min_features_rejecting < 1:
            raise InvalidPolicy('At least one rejecting feature is required.')
        if self.correction not in ('none', 'bonferroni'):
            raise InvalidPolicy('Unknown multiple-testing correction: %s' % self.correction)

    def effective_alpha(self, num_features):
        if self.correction == 'bonferroni':
            return self.alpha / num_features
        return self.alpha


def welch_tests(mean_a, std_a, n_a, mean_b, std_b, n_b, alpha):
    """Two-sided Welch's t-tests over aligned arrays of summary statistics.

    When both variances are zero the test is degenerate: the
    decision is whether the means differ, dof is the pooled
    n_a + n_b - 2 and t is signed infinity (0 for equal means).

    Returns
    -------
    numpy.ndarray
        t statistics.
    numpy.ndarray
        Welch-Satterthwaite degrees of freedom.
    numpy.ndarray
        Rejection decisions.
    numpy.ndarray
        Degenerate-variance flags.
    """

    mean_a = np.atleast_1d(np.asarray(mean_a, dtype=float))
    std_a = np.atleast_1d(np.asarray(std_a, dtype=float))
    n_a = np.atleast_1d(np.asarray(n_a, dtype=float))
    mean_b = np.atleast_1d(np.asarray(mean_b, dtype=float))
    std_b = np.atleast_1d(np.asarray(std_b, dtype=float))
    n_b = np.atleast_1d(np.asarray(n_b, dtype=float))

    if np.any(n_a < 2) or np.any(n_b < 2):
        raise InsufficientSamples("Welch's test requires at least 2 samples per group.")

    var_a = std_a ** 2 / n_a
    var_b = std_b ** 2 / n_b
    se2 = var_a + var_b
    diff = mean_a - mean_b
    pooled_dof = n_a + n_b - 2

    degenerate = se2 == 0
    dof_denom = var_a ** 2 / (n_a - 1) + var_b ** 2 / (n_b - 1)

    with np.errstate(divide='ignore', invalid='ignore'):
        t_stat = np.where(degenerate,
                          np.sign(diff) * np.inf,
                          diff / np.sqrt(np.where(degenerate, 1.0, se2)))
        dof = np.where(dof_denom > 0, se2 ** 2 / np.where(dof_denom > 0, dof_denom, 1.0), pooled_dof)
    t_stat = np.where(degenerate & (diff == 0), 0.0, t_stat)

    critical = stats.t.ppf(1.0 - alpha / 2.0, dof)
    reject = np.where(degenerate, diff != 0, np.abs(t_stat) > critical)

    return t_stat, dof, reject.astype(bool), degenerate


def welch_t(a, b, alpha, feature_index=0):
    """Welch's t-test between two SampleStats."""

    t_stat, dof, reject, degenerate = welch_tests(a.mean, a.std, a.n, b.mean, b.std, b.n, alpha)
    return WelchResult(float(t_stat[0]), float(dof[0]), bool(reject[0]), feature_index, bool(degenerate[0]))


def compare_windows(prev, curr, policy):
    """Per-feature Welch results for two windows."""

    if len(prev.per_feature) != len(curr.per_feature):
        raise SchemaMismatch('Windows %d and %d have different feature counts.' % (prev.index, curr.index))

    alpha = policy.effective_alpha(len(curr.per_feature))
    t_stat, dof, reject, degenerate = welch_tests(prev.means, prev.stds, prev.counts,
                                                  curr.means, curr.stds, curr.counts,
                                                  alpha)

    return [WelchResult(float(t_stat[i]), float(dof[i]), bool(reject[i]), i, bool(degenerate[i]))
            for i in range(len(t_stat))]


def detect_stream(prev, curr, policy):
    """Determine if window curr is a transition relative to window prev."""

    if prev.index + 1 != curr.index:
        raise NonConsecutive('Windows %d and %d are not consecutive.' % (prev.index, curr.index))

    if policy.min_features_rejecting > len(curr.per_feature):
        raise InvalidPolicy('Policy requires %d rejecting features but windows have %d.' % (policy.min_features_rejecting,
                                                                                             len(curr.per_feature)))

    results = compare_windows(prev, curr, policy)
    return sum(1 for r in results if r.reject) >= policy.min_features_rejecting


def detect_batch(windows, policy):
    """Indices of all transition windows in a window sequence.

    Index 0 of the sequence is never flagged since it has no
    predecessor.
    """

    if len(windows) < 2:
        raise TooFewWindows('Batch change detection requires at least 2 windows.')

    transitions = set()
    for prev, curr in zip(windows[:-1], windows[1:]):
        if detect_stream(prev, curr, policy):
            transitions.add(curr.index)

    return transitions


class ChangeDetector(object):
    """Stream and batch change detection with a fixed policy."""

    def __init__(self, policy=None):
        """Initialization.

        Parameters
        ----------
        policy : ChangePolicy
            Significance level and multi-feature decision rule.
        """

        self.logger = logging.getLogger('timestamp')

        self.policy = policy if policy else ChangePolicy()
        self.prev_window = None

    def stream(self, window):
        """Real-time use: compare each window with the one before it."""

        prev = self.prev_window
        self.prev_window = window
        if prev is None:
            return False

        return detect_stream(prev, window, self.policy)

    def batch(self, windows):
        """Off-line use: flag transition windows of a persisted sequence."""

        transitions = detect_batch(windows, self.policy)
        self.logger.info('Identified %d transition windows in %d windows.' % (len(transitions), len(windows)))

        return transitions


def write_transition_indices(indices, output_file):
    """Write transition window indices, one per line."""

    fout = open(output_file, 'w')
    for idx in sorted(indices):
        fout.write('%d\n' % idx)
    fout.close()
