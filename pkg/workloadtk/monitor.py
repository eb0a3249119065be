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

"""On-line workload monitor.

Each closed observation window is tested for a change against its
predecessor. A changed window keeps the label of the previous
window, is marked as in transition and, once a transition model
exists, has its transition classified. Other windows are labelled
by the workload classifier. The label history then drives the
predictor and the resulting workload context is emitted.
"""

import logging

import numpy as np

from workloadtk.default_values import DefaultValues
from workloadtk.change_detector import ChangeDetector
from workloadtk.windowing import to_analytic_window, rate_transform
from workloadtk.classifiers.forest import classify_window, classify_transition
from workloadtk.predictor import predict, emit_context
from workloadtk.exceptions import DimensionMismatch


class MonitorStep(object):
    """Output of the monitor for one observation window."""

    def __init__(self, context, analytic, rate, flagged, confidence, transition_label=None):
        self.context = context
        self.analytic = analytic
        self.rate = rate
        self.flagged = flagged
        self.confidence = confidence
        self.transition_label = transition_label


class WorkloadMonitor(object):
    """Label windows, predict upcoming workloads and emit workload contexts."""

    def __init__(self, emitter, policy=None, transition_width=DefaultValues.TRANSITION_WIDTH):
        """Initialization.

        Parameters
        ----------
        emitter : ContextEmitter
            Writer of the workload context stream.
        policy : ChangePolicy
            Change detection policy.
        transition_width : int
            Rate windows per transition classifier input.
        """

        self.logger = logging.getLogger('timestamp')

        self.emitter = emitter
        self.detector = ChangeDetector(policy)
        self.transition_width = transition_width

        self.workload_model = None
        self.transition_model = None
        self.predictor = None
        self.transition_labels = None

        self.prev_analytic = None
        self.rates = []
        self.history = []
        self.flagged = set()
        self.transitions = {}

    def update_models(self, trained):
        """Swap in newly trained models; a missing model keeps the previous one."""

        if trained.workload is not None:
            self.workload_model = trained.workload
        if trained.transition is not None:
            self.transition_model = trained.transition
        if trained.predictor is not None:
            self.predictor = trained.predictor
        if trained.transition_labels is not None:
            self.transition_labels = trained.transition_labels

    def _transition_features(self):
        if len(self.rates) < self.transition_width:
            return None

        return np.concatenate([np.array(r.deltas, dtype=float) for r in self.rates[-self.transition_width:]])

    def process(self, window, emitted_at):
        """Run the monitor on a closed observation window.

        Parameters
        ----------
        window : ObservationWindow
            Next window of the observation stream.
        emitted_at : float
            Time the workload context is emitted.

        Returns
        -------
        MonitorStep
            Emitted context and the derived analytic and rate windows.
        """

        analytic = to_analytic_window(window)
        rate = None
        if self.prev_analytic is not None:
            rate = rate_transform(self.prev_analytic, analytic)
            self.rates.append(rate)
            self.rates = self.rates[-self.transition_width:]
        self.prev_analytic = analytic

        flagged = self.detector.stream(window)

        confidence = 0.0
        transition_label = None
        if flagged:
            self.flagged.add(window.index)
            label = self.history[-1] if self.history else DefaultValues.UNKNOWN_LABEL

            features = self._transition_features()
            if self.transition_model is not None and features is not None:
                try:
                    transition_label, confidence = classify_transition(self.transition_model, features)
                    self.transitions[window.index] = transition_label
                except DimensionMismatch as e:
                    self.logger.warning('Transition classification failed for window %d: %s' % (window.index, e))
        elif self.workload_model is not None:
            label, confidence = classify_window(self.workload_model, analytic)
        else:
            label = DefaultValues.UNKNOWN_LABEL

        self.history.append(label)

        if self.predictor is not None:
            preds = predict(self.predictor, self.history)
        else:
            preds = {h: label for h in DefaultValues.HORIZONS}

        emit_context(self.emitter, window.index, label, preds, emitted_at, flagged)
        ctx = self.emitter.last

        return MonitorStep(ctx, analytic, rate, flagged, confidence, transition_label)
