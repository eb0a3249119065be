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
import sys
import json
import logging
import argparse

from biolib.common import make_sure_path_exists
from biolib.logger import logger_setup

from workloadtk import __version__
from workloadtk.default_values import DefaultValues
from workloadtk.config import LoopSettings
from workloadtk.common import read_records
from workloadtk.windowing import ObservationWindow
from workloadtk.knowledge_base import KnowledgeBase
from workloadtk.change_detector import ChangeDetector, write_transition_indices
from workloadtk.discovery import WorkloadDiscovery
from workloadtk.training import ClassifierTraining
from workloadtk.run_workflow import RunWorkflow
from workloadtk.metrics import read_report, format_report
from workloadtk.simulator.scenario import load_scenario, resolve_scenario
from workloadtk.simulator.cluster import run as simulate_scenario
from workloadtk.exceptions import (WorkloadTkError,
                                   InvalidScenario,
                                   NoReport)


class UsageError(Exception):
    pass


class WorkloadTkArgumentParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors as exceptions."""

    def error(self, message):
        raise UsageError(message)


class OptionsParser():
    def __init__(self):
        """Initialization"""
        self.logger = logging.getLogger('timestamp')

    def _scenario(self, options):
        return load_scenario(resolve_scenario(options.scenario))

    def run(self, options):
        """Run a scenario through the autonomic loop."""

        scenario = self._scenario(options)
        settings = LoopSettings.from_layers(scenario, options)

        workflow = RunWorkflow(scenario, settings, options.seed)
        workflow.run(options.out)

        self.logger.info('Results written to: %s' % options.out)

    def report(self, options):
        """Summarize the metrics report of a run."""

        if not os.path.isdir(options.run_dir):
            raise NoReport('Run directory does not exist: %s' % options.run_dir)

        report = read_report(options.run_dir)
        sys.stdout.write(format_report(report))

    def simulate(self, options):
        """Write the telemetry and ground truth of a scenario."""

        scenario = self._scenario(options)
        make_sure_path_exists(options.out)

        simulator, trace = simulate_scenario(scenario, options.seed)
        trace.write(options.out, simulator)

        self.logger.info('Simulation trace written to: %s' % options.out)

    def detect(self, options):
        """Identify transition windows in an observation window stream."""

        if not os.path.exists(options.window_file):
            raise UsageError('Window file does not exist: %s' % options.window_file)

        settings = LoopSettings.from_layers(None, options)
        windows = [ObservationWindow.from_record(r) for r in read_records(options.window_file)]

        detector = ChangeDetector(settings.change_policy())
        transitions = detector.batch(windows)
        write_transition_indices(transitions, options.output_file)

        self.logger.info('Transition windows written to: %s' % options.output_file)

    def discover(self, options):
        """Discover workloads in the window stream of a knowledge base."""

        settings = LoopSettings.from_layers(None, options)
        kb = KnowledgeBase(options.kb_dir)
        windows = [ObservationWindow.from_record(r) for r in kb.read_stream(DefaultValues.TRANSFORMATION_ZONE,
                                                                            DefaultValues.OBSERVATION_STREAM)]

        discovery = WorkloadDiscovery(kb, settings.discovery_params())
        reports = discovery.run_stream(windows, settings.batch_length)

        self.logger.info('Ran discovery over %d batches; WorkloadDB holds %d workloads.' % (len(reports),
                                                                                          len(kb.workload_db)))

    def train(self, options):
        """Train the on-line classifiers and predictor of a knowledge base."""

        settings = LoopSettings.from_layers(None, options)
        kb = KnowledgeBase(options.kb_dir)

        training = ClassifierTraining(kb, settings, options.seed)
        training.run()

        self.logger.info('Models written to: %s' % kb.path(DefaultValues.ANALYTICS_ZONE, DefaultValues.MODEL_DIR))

    def parse_options(self, options):
        """Parse user options and call the correct pipeline(s)"""

        if options.subparser_name == 'run':
            self.run(options)
        elif options.subparser_name == 'report':
            self.report(options)
        elif options.subparser_name == 'simulate':
            self.simulate(options)
        elif options.subparser_name == 'detect':
            self.detect(options)
        elif options.subparser_name == 'discover':
            self.discover(options)
        elif options.subparser_name == 'train':
            self.train(options)
        else:
            raise UsageError('Unknown WorkloadTk command: %s' % options.subparser_name)

        return 0


def _add_loop_flags(parser, flags):
    if 'windows_len' in flags:
        parser.add_argument('--windows-len', type=float, help='observation window length in seconds')
    if 'alpha' in flags:
        parser.add_argument('--alpha', type=float, help='significance level of change detection')
    if 'eps' in flags:
        parser.add_argument('--eps', type=float, help='DBSCAN neighbourhood radius')
    if 'epsilon_drift' in flags:
        parser.add_argument('--epsilon-drift', type=float, help='drift threshold in noise units')
    if 'minpts' in flags:
        parser.add_argument('--minpts', type=int, help='DBSCAN minimum neighbourhood size')
    if 'batch_len' in flags:
        parser.add_argument('--batch-len', type=int, help='windows per discovery batch')
    if 'budget_global' in flags:
        parser.add_argument('--budget-global', type=int, help='probe budget of a global search')
    if 'budget_local' in flags:
        parser.add_argument('--budget-local', type=int, help='probe budget of a local search')
    if 'cpus' in flags:
        parser.add_argument('--cpus', type=int, help='processes used to train forests')


def build_parser():
    parser = WorkloadTkArgumentParser(prog='workloadtk',
                                      description='Autonomic workload discovery and configuration tuning.')
    parser.add_argument('--version', action='version', version='WorkloadTk v%s' % __version__)
    subparsers = parser.add_subparsers(help='--', dest='subparser_name')
    subparsers.required = True

    all_flags = ('windows_len', 'alpha', 'eps', 'epsilon_drift', 'minpts',
                 'batch_len', 'budget_global', 'budget_local', 'cpus')

    run_parser = subparsers.add_parser('run', description='Run a scenario end to end and write a metrics report.')
    run_parser.add_argument('scenario', help='scenario file or name of a bundled scenario')
    run_parser.add_argument('--out', required=True, help='output directory')
    run_parser.add_argument('--seed', type=int, help='seed overriding the scenario seed')
    run_parser.add_argument('--silent', action='store_true', help='suppress console output')
    _add_loop_flags(run_parser, all_flags)

    report_parser = subparsers.add_parser('report', description='Print the metrics report of a run.')
    report_parser.add_argument('run_dir', help='output directory of a run')

    simulate_parser = subparsers.add_parser('simulate', description='Write the simulated telemetry of a scenario.')
    simulate_parser.add_argument('scenario', help='scenario file or name of a bundled scenario')
    simulate_parser.add_argument('--out', required=True, help='output directory')
    simulate_parser.add_argument('--seed', type=int, help='seed overriding the scenario seed')

    detect_parser = subparsers.add_parser('detect', description='Identify transition windows in a window stream.')
    detect_parser.add_argument('window_file', help='observation windows, one record per line')
    detect_parser.add_argument('output_file', help='output file of transition window indices')
    _add_loop_flags(detect_parser, ('alpha',))

    discover_parser = subparsers.add_parser('discover', description='Discover workloads in a knowledge base.')
    discover_parser.add_argument('kb_dir', help='knowledge base directory')
    _add_loop_flags(discover_parser, ('eps', 'epsilon_drift', 'minpts', 'batch_len'))

    train_parser = subparsers.add_parser('train', description='Train classifiers and predictor from a knowledge base.')
    train_parser.add_argument('kb_dir', help='knowledge base directory')
    train_parser.add_argument('--seed', type=int, default=0, help='seed of forest training')
    _add_loop_flags(train_parser, ('cpus',))

    return parser


def _fail(error, message):
    sys.stderr.write(json.dumps({'error': error, 'message': message}) + '\n')


def main(argv=None):
    """Entry point; returns the process exit code."""

    parser = build_parser()
    try:
        options = parser.parse_args(argv)
    except UsageError as e:
        _fail('UsageError', str(e))
        return 2

    if options.subparser_name == 'run':
        try:
            make_sure_path_exists(options.out)
        except OSError as e:
            _fail(type(e).__name__, str(e))
            return 3
        logger_setup(options.out, DefaultValues.LOG_FILE, 'WorkloadTk', __version__, options.silent)
    else:
        logging.basicConfig(format='', level=logging.INFO)

    try:
        OptionsParser().parse_options(options)
    except (UsageError, InvalidScenario, NoReport) as e:
        _fail(type(e).__name__, str(e))
        return 2
    except (WorkloadTkError, OSError) as e:
        _fail(type(e).__name__, str(e))
        return 3

    return 0
