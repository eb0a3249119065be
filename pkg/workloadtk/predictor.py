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

"""Workload prediction and emission of the workload context stream."""

import json
import logging
from abc import ABC, abstractmethod
from collections import Counter, defaultdict
from dataclasses import dataclass

from workloadtk.default_values import DefaultValues
from workloadtk.exceptions import (TooShort,
                                   OutOfOrder,
                                   InvalidRecord)


@dataclass(frozen=True)
class WorkloadContext:
    window_index: int
    current_label: int
    pred_t1: int
    pred_t5: int
    pred_t10: int
    emitted_at: float
    in_transition: bool = False

    def to_record(self):
        return {'window_index': self.window_index,
                'current_label': self.current_label,
                'pred_t1': self.pred_t1,
                'pred_t5': self.pred_t5,
                'pred_t10': self.pred_t10,
                'emitted_at': self.emitted_at,
                'in_transition': self.in_transition}

    @classmethod
    def from_record(cls, record):
        return cls(int(record['window_index']),
                   int(record['current_label']),
                   int(record['pred_t1']),
                   int(record['pred_t5']),
                   int(record['pred_t10']),
                   float(record['emitted_at']),
                   bool(record.get('in_transition', False)))


def _mode(counts):
    """Most frequent label; ties go to the smallest label."""

    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


class WorkloadPredictor(ABC):
    """Predicts future workload labels from the recent label history."""

    @abstractmethod
    def train(self, labels):
        pass

    @abstractmethod
    def next_label(self, history):
        pass

    @abstractmethod
    def to_record(self):
        pass

    def predict(self, recent, horizons=DefaultValues.HORIZONS):
        """Labels at each horizon by rolling out next-label predictions.

        Returns
        -------
        dict
            Predicted label keyed by horizon.
        """

        assert recent

        history = list(recent)
        rollout = []
        for _ in range(max(horizons)):
            label = self.next_label(history)
            rollout.append(label)
            history.append(label)

        return {h: rollout[h - 1] for h in horizons}

    def save(self, output_file):
        with open(output_file, 'w') as fout:
            fout.write(json.dumps(self.to_record(), sort_keys=True) + '\n')


class FrequencyPredictor(WorkloadPredictor):
    """Order-k frequency model with suffix backoff.

    The next label follows the most frequent successor of the
    longest suffix of the history seen in training, backing off to
    shorter suffixes and finally to the most frequent label.
    """

    def __init__(self, order=DefaultValues.PREDICTOR_ORDER):
        self.order = order
        self.contexts = defaultdict(Counter)
        self.marginal = Counter()

    def train(self, labels):
        labels = [int(l) for l in labels]
        if len(labels) < 2:
            raise TooShort('Predictor training requires at least 2 labels, received %d.' % len(labels))

        self.contexts = defaultdict(Counter)
        self.marginal = Counter(labels)
        for i in range(1, len(labels)):
            for length in range(1, min(self.order, i) + 1):
                self.contexts[tuple(labels[i - length:i])][labels[i]] += 1

        return self

    def next_label(self, history):
        for length in range(min(self.order, len(history)), 0, -1):
            context = tuple(history[-length:])
            if context in self.contexts:
                return _mode(self.contexts[context])

        return _mode(self.marginal)

    def to_record(self):
        return {'version': DefaultValues.MODEL_VERSION,
                'kind': 'frequency',
                'order': self.order,
                'contexts': [[list(ctx), sorted(counts.items())] for ctx, counts in sorted(self.contexts.items())],
                'marginal': sorted(self.marginal.items())}

    @classmethod
    def from_record(cls, record):
        if record.get('version') != DefaultValues.MODEL_VERSION or record.get('kind') != 'frequency':
            raise InvalidRecord('Unsupported predictor file version.')

        model = cls(int(record['order']))
        for ctx, counts in record['contexts']:
            model.contexts[tuple(ctx)] = Counter({int(l): int(c) for l, c in counts})
        model.marginal = Counter({int(l): int(c) for l, c in record['marginal']})

        return model

    @classmethod
    def load(cls, model_file):
        with open(model_file) as f:
            return cls.from_record(json.load(f))


def train_predictor(labels, k=DefaultValues.PREDICTOR_ORDER):
    return FrequencyPredictor(k).train(labels)


def predict(m, recent):
    """Predicted labels at t+1, t+5 and t+10."""

    recent = list(recent)[-getattr(m, 'order', len(recent)):]
    preds = m.predict(recent, DefaultValues.HORIZONS)
    assert preds[1] == m.next_label(recent)

    return preds


class ContextEmitter(object):
    """Single writer of the workload context stream."""

    def __init__(self, kb=None):
        """Initialization.

        Parameters
        ----------
        kb : KnowledgeBase
            Knowledge base holding the context stream, or None to
            keep only the latest context in memory.
        """

        self.logger = logging.getLogger('timestamp')

        self.kb = kb
        self.last_index = None
        self.last = None
        self.count = 0

        if kb:
            records = kb.read_stream(DefaultValues.ANALYTICS_ZONE, DefaultValues.CONTEXT_STREAM)
            if records:
                self.last = WorkloadContext.from_record(records[-1])
                self.last_index = self.last.window_index
                self.count = len(records)

    def emit(self, ctx):
        """Persist ctx and make it the latest context.

        Returns
        -------
        int
            Offset of ctx in the context stream.
        """

        if self.last_index is not None and ctx.window_index <= self.last_index:
            raise OutOfOrder('Context for window %d follows window %d.' % (ctx.window_index, self.last_index))

        if self.kb:
            offset = self.kb.append_stream(DefaultValues.ANALYTICS_ZONE, DefaultValues.CONTEXT_STREAM, ctx.to_record())
        else:
            offset = self.count

        # advance only once the context is stored
        self.last_index = ctx.window_index
        self.last = ctx
        self.count = offset + 1

        return offset


def emit_context(emitter, t, current_label, preds, emitted_at, in_transition=False):
    """Append the workload context of window t."""

    ctx = WorkloadContext(t, current_label, preds[1], preds[5], preds[10], emitted_at, in_transition)
    return emitter.emit(ctx)
