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
import shutil
import logging
from dataclasses import replace

import numpy as np

from biolib.common import make_sure_path_exists
from biolib.misc.time_keeper import TimeKeeper

from workloadtk.default_values import DefaultValues
from workloadtk.knowledge_base import KnowledgeBase
from workloadtk.windowing import WindowAssembler
from workloadtk.discovery import WorkloadDiscovery
from workloadtk.training import ClassifierTraining
from workloadtk.training_sets import read_window_labels
from workloadtk.monitor import WorkloadMonitor
from workloadtk.predictor import ContextEmitter, WorkloadContext
from workloadtk.plugin import ConfigurationPlugin
from workloadtk.simulator.cluster import ClusterSimulator, ground_truth_optimum
from workloadtk.metrics import (metric_purity,
                                metric_awt,
                                change_precision_recall,
                                prediction_accuracy,
                                tuning_efficiency,
                                probes_by_label,
                                runtime_ratio,
                                write_report)


class RunResult(object):
    """Report and the live components of a finished run."""

    def __init__(self, report, kb, simulator, monitor, plugin, jobs, discovery_reports, steps):
        self.report = report
        self.kb = kb
        self.simulator = simulator
        self.monitor = monitor
        self.plugin = plugin
        self.jobs = jobs
        self.discovery_reports = discovery_reports
        self.steps = steps


class RunWorkflow(object):
    """Drive the simulated cluster through the on-line and off-line loops."""

    def __init__(self, scenario, settings, seed=None):
        """Initialization.

        Parameters
        ----------
        scenario : Scenario
            Scenario to simulate.
        settings : LoopSettings
            Settings of the loop.
        seed : int
            Seed overriding the scenario's seed.
        """

        self.logger = logging.getLogger('timestamp')

        self.scenario = replace(scenario, window_length=settings.window_length)
        self.settings = settings
        self.seed = scenario.seed if seed is None else seed

    def _knowledge_base(self, output_dir):
        kb_dir = os.path.join(output_dir, DefaultValues.KB_DIR)
        if os.path.exists(kb_dir):
            self.logger.warning('Removing knowledge base of a previous run: %s' % kb_dir)
            shutil.rmtree(kb_dir)

        return KnowledgeBase(kb_dir)

    def _write_traces(self, trace_dir, simulator, steps, jobs, decisions, kb):
        make_sure_path_exists(trace_dir)

        fout = open(os.path.join(trace_dir, DefaultValues.WINDOW_TRACE_FILE), 'w')
        fout.write('window,truth,truth_label,in_transition,flagged,label,confidence,pred_t1,pred_t5,pred_t10\n')
        for wp, step in zip(simulator.plan, steps):
            ctx = step.context
            fout.write('%d,%s,%d,%d,%d,%d,%.6f,%d,%d,%d\n' % (wp.index,
                                                            wp.truth,
                                                            wp.truth_label,
                                                            wp.in_transition,
                                                            step.flagged,
                                                            ctx.current_label,
                                                            step.confidence,
                                                            ctx.pred_t1,
                                                            ctx.pred_t5,
                                                            ctx.pred_t10))
        fout.close()

        fout = open(os.path.join(trace_dir, DefaultValues.JOB_TRACE_FILE), 'w')
        fout.write('window,truth,label,branch,probes,config,runtime,expected,runtime_default,runtime_rule_of_thumb\n')
        for job, d in zip(jobs, decisions):
            fout.write('%d,%s,%d,%s,%d,%s,%.6f,%.6f,%.6f,%.6f\n' % (job.window_index,
                                                                  job.truth,
                                                                  d.label,
                                                                  d.branch,
                                                                  d.probes,
                                                                  str(job.config).replace(',', ';'),
                                                                  job.runtime,
                                                                  job.expected,
                                                                  job.runtime_default,
                                                                  job.runtime_rule_of_thumb))
        fout.close()

        fout = open(os.path.join(trace_dir, DefaultValues.SEARCH_TRACE_FILE), 'w')
        fout.write('window,label,kind,probes,objective,budget_exhausted\n')
        for r in kb.read_stream(DefaultValues.ANALYTICS_ZONE, DefaultValues.SEARCH_STREAM):
            objective = '' if r['objective'] is None else '%.6f' % r['objective']
            fout.write('%d,%d,%s,%d,%s,%d\n' % (r['window_index'],
                                                 r['label'],
                                                 r['kind'],
                                                 r['probes'],
                                                 objective,
                                                 r['budget_exhausted']))
        fout.close()

    def _report(self, simulator, kb, monitor, plugin, jobs, discovery_reports):
        plan = simulator.plan
        truth_transitions = set(wp.index for wp in plan if wp.in_transition)

        window_labels = read_window_labels(kb)
        assignments = {idx: label for idx, label in window_labels.items() if idx not in truth_transitions}
        ground_truth = {idx: plan[idx].truth_label for idx in assignments}

        noise = np.max([c.noise for c in self.scenario.classes.values()], axis=0)
        scale = np.maximum(noise, DefaultValues.STD_FLOOR)
        truth_means = {t: self.scenario.type_mean(t) for t in self.scenario.truth_types()}
        centroids = {r.label: r.characterization.means for r in kb.workload_db.observed_records()}

        precision, recall = change_precision_recall(monitor.flagged, truth_transitions)

        optimum_cache = {}
        optima = {}
        for wp in plan:
            if wp.runtime not in optimum_cache:
                optimum_cache[wp.runtime] = ground_truth_optimum(wp.runtime, simulator.space)[1]
            optima[wp.index] = optimum_cache[wp.runtime]

        probes, searches = probes_by_label(plugin.decisions)
        contexts = [WorkloadContext.from_record(r) for r in kb.read_stream(DefaultValues.ANALYTICS_ZONE,
                                                                           DefaultValues.CONTEXT_STREAM)]

        report = {'version': DefaultValues.REPORT_VERSION,
                  'scenario': self.scenario.name,
                  'seed': self.seed,
                  'windows': len(plan),
                  'purity': metric_purity(assignments, ground_truth),
                  'awt': metric_awt(centroids, truth_means, scale),
                  'change_precision': precision,
                  'change_recall': recall,
                  'pred_acc_t1': prediction_accuracy(contexts, 1),
                  'pred_acc_t5': prediction_accuracy(contexts, 5),
                  'pred_acc_t10': prediction_accuracy(contexts, 10),
                  'tuning_efficiency': tuning_efficiency(jobs, optima, truth_transitions),
                  'total_probes': sum(probes.values()),
                  'probes_by_label': probes,
                  'searches_by_label': searches,
                  'runtime_vs_default': runtime_ratio(jobs, 'runtime_default'),
                  'runtime_vs_rule_of_thumb': runtime_ratio(jobs, 'runtime_rule_of_thumb'),
                  'workloads': len(kb.workload_db.observed_records()),
                  'synthetic_workloads': len(kb.workload_db.synthetic_records()),
                  'drift_events': sum(len(r.drifting_labels) for r in discovery_reports),
                  'settings': self.settings.to_record()}

        return report

    def run(self, output_dir):
        """Run the scenario to completion.

        Parameters
        ----------
        output_dir : str
            Directory receiving the knowledge base, traces and metrics report.

        Returns
        -------
        RunResult
            Report and the final state of the loop.
        """

        time_keeper = TimeKeeper()

        make_sure_path_exists(output_dir)
        kb = self._knowledge_base(output_dir)

        simulator = ClusterSimulator(self.scenario, self.seed)
        assembler = WindowAssembler(self.scenario.schema, self.scenario.window_length)
        monitor = WorkloadMonitor(ContextEmitter(kb), self.settings.change_policy(), self.settings.transition_width)
        plugin = ConfigurationPlugin(kb.workload_db,
                                     self.scenario.space,
                                     self.settings.sync_tolerance,
                                     self.settings.budget_global,
                                     self.settings.budget_local,
                                     kb)
        discovery = WorkloadDiscovery(kb, self.settings.discovery_params())
        training = ClassifierTraining(kb, self.settings, self.seed)

        self.logger.info('Running scenario %s over %d windows (seed %d).' % (self.scenario.name,
                                                                            simulator.num_windows,
                                                                            self.seed))

        steps = []
        jobs = []
        discovery_reports = []
        batch = []
        for t in range(simulator.num_windows):
            samples = simulator.window_samples(t)
            kb.append_raw(samples)
            for sample in samples:
                assembler.add(sample)

            now = simulator.span(t)[1]
            for window in assembler.advance(now):
                kb.append_stream(DefaultValues.TRANSFORMATION_ZONE, DefaultValues.OBSERVATION_STREAM, window.to_record())
                step = monitor.process(window, now)
                kb.append_stream(DefaultValues.TRANSFORMATION_ZONE, DefaultValues.ANALYTIC_STREAM, step.analytic.to_record())
                if step.rate is not None:
                    kb.append_stream(DefaultValues.TRANSFORMATION_ZONE, DefaultValues.RATE_STREAM, step.rate.to_record())
                steps.append(step)
                batch.append(window)

            ctx = steps[-1].context
            jobs.append(simulator.rm_stub_step(t, lambda _t, objective: plugin.main(ctx, now, objective)))

            if len(batch) == self.settings.batch_length:
                discovery_reports.append(discovery.run(batch))
                monitor.update_models(training.run())
                batch = []

        if len(batch) >= max(self.settings.min_pts, 2):
            discovery_reports.append(discovery.run(batch))

        report = self._report(simulator, kb, monitor, plugin, jobs, discovery_reports)
        write_report(report, os.path.join(output_dir, DefaultValues.REPORT_FILE))
        self._write_traces(os.path.join(output_dir, DefaultValues.TRACE_DIR), simulator, steps, jobs, plugin.decisions, kb)

        self.logger.info('Metrics report written to: %s' % os.path.join(output_dir, DefaultValues.REPORT_FILE))
        self.logger.info(time_keeper.get_time_stamp())

        return RunResult(report, kb, simulator, monitor, plugin, jobs, discovery_reports, steps)
