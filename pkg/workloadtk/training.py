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

import os
import logging
from dataclasses import dataclass

from biolib.common import make_sure_path_exists
from biolib.misc.time_keeper import TimeKeeper

from workloadtk.default_values import DefaultValues
from workloadtk.training_sets import (TransitionLabels,
                                      build_training_sets,
                                      read_window_labels,
                                      read_window_streams,
                                      write_training_sets)
from workloadtk.zsl import WorkloadSynthesizer
from workloadtk.classifiers.forest import ForestModel, train_forest
from workloadtk.predictor import FrequencyPredictor, train_predictor


@dataclass
class TrainedModels:
    workload: ForestModel = None
    transition: ForestModel = None
    predictor: FrequencyPredictor = None
    transition_labels: TransitionLabels = None
    generation: int = 0


class ClassifierTraining(object):
    """Build training sets from the knowledge base and train the on-line models."""

    def __init__(self, kb, settings, seed=0):
        """Initialization.

        Parameters
        ----------
        kb : KnowledgeBase
            Knowledge base with window streams, window labels and the WorkloadDB.
        settings : LoopSettings
            Classifier, synthesis and prediction settings.
        seed : int
            Seed of forest training and synthetic instance draws.
        """

        self.logger = logging.getLogger('timestamp')

        self.kb = kb
        self.settings = settings
        self.seed = seed

        self.generation = 0

    def _train(self, name, rows, output_file):
        if len(rows) < 2:
            self.logger.warning('Too few %s rows to train a classifier (%d).' % (name, len(rows)))
            return None

        model = train_forest(rows, self.settings.forest_params(), self.seed, self.settings.cpus)
        model.save(output_file)
        self.logger.info('  %s classifier written to: %s' % (name.capitalize(), output_file))

        return model

    def run(self):
        """Train the workload classifier, transition classifier and predictor.

        Returns
        -------
        TrainedModels
            Models trained in this generation; a model is None when
            its training set is too small.
        """

        time_keeper = TimeKeeper()

        self.generation += 1
        trained = TrainedModels(generation=self.generation)

        db = self.kb.workload_db
        if not db.observed_records():
            self.logger.warning('No workloads have been discovered; skipping training.')
            return trained

        model_dir = self.kb.path(DefaultValues.ANALYTICS_ZONE, DefaultValues.MODEL_DIR)
        make_sure_path_exists(model_dir)

        self.logger.info('Building training sets (generation %d).' % self.generation)
        analytic, rates = read_window_streams(self.kb)
        window_labels = read_window_labels(self.kb)
        registry = TransitionLabels(self.kb)
        sets = build_training_sets(db,
                                   analytic,
                                   rates,
                                   window_labels,
                                   registry,
                                   self.settings.transition_width,
                                   self.settings.include_steady,
                                   self.settings.segment_length,
                                   DefaultValues.HORIZONS)

        synthesizer = WorkloadSynthesizer(self.settings.synthetic_instances, self.seed)
        descriptor, merged = synthesizer.run(db, sets.pure)
        records = descriptor.to_records()
        for r in records:
            r['generation'] = self.generation
        self.kb.append_many(DefaultValues.ANALYTICS_ZONE, DefaultValues.CLASS_DESCRIPTOR_STREAM, records)

        write_training_sets(sets, merged, self.kb.path(DefaultValues.ANALYTICS_ZONE, DefaultValues.TRAINING_DIR))

        trained.workload = self._train('workload',
                                       merged,
                                       os.path.join(model_dir, DefaultValues.WORKLOAD_MODEL_FILE))
        trained.transition = self._train('transition',
                                         sets.transition,
                                         os.path.join(model_dir, DefaultValues.TRANSITION_MODEL_FILE))
        trained.transition_labels = registry

        if len(sets.label_sequence) >= 2:
            trained.predictor = train_predictor(sets.label_sequence, self.settings.predictor_order)
            trained.predictor.save(os.path.join(model_dir, DefaultValues.PREDICTOR_MODEL_FILE))
        else:
            self.logger.warning('Too few labelled windows to train the predictor.')

        self.logger.info(time_keeper.get_time_stamp())

        return trained


def load_models(kb):
    """Models most recently saved to the knowledge base."""

    model_dir = kb.path(DefaultValues.ANALYTICS_ZONE, DefaultValues.MODEL_DIR)

    trained = TrainedModels(transition_labels=TransitionLabels(kb))
    workload_file = os.path.join(model_dir, DefaultValues.WORKLOAD_MODEL_FILE)
    if os.path.exists(workload_file):
        trained.workload = ForestModel.load(workload_file)
    transition_file = os.path.join(model_dir, DefaultValues.TRANSITION_MODEL_FILE)
    if os.path.exists(transition_file):
        trained.transition = ForestModel.load(transition_file)
    predictor_file = os.path.join(model_dir, DefaultValues.PREDICTOR_MODEL_FILE)
    if os.path.exists(predictor_file):
        trained.predictor = FrequencyPredictor.load(predictor_file)

    return trained
