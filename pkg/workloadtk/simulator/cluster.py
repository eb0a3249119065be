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

"""Deterministic synthetic cluster driven by a scenario."""

import os
import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from biolib.common import make_sure_path_exists

from workloadtk.windowing import RawSample, window_from_values
from workloadtk.simulator.scenario import RuntimeModel


@dataclass(frozen=True)
class WindowPlan:
    index: int
    truth: str
    truth_label: int
    in_transition: bool
    generators: Tuple[Tuple[np.ndarray, np.ndarray], ...]
    runtime: RuntimeModel


@dataclass(frozen=True)
class JobRecord:
    window_index: int
    truth: str
    config: object
    runtime: float
    expected: float
    runtime_default: float
    runtime_rule_of_thumb: float


@dataclass
class SimulationTrace:
    windows: list
    jobs: list

    @property
    def transition_windows(self):
        return set(w.index for w in self.windows if w.in_transition)

    def truth_labels(self):
        return {w.index: w.truth_label for w in self.windows}

    def write(self, output_dir, simulator):
        """Write raw samples, per-window ground truth and job completions."""

        make_sure_path_exists(output_dir)

        fout = open(os.path.join(output_dir, 'raw_samples.csv'), 'w')
        for w in self.windows:
            for sample in simulator.window_samples(w.index):
                fout.write(sample.to_line() + '\n')
        fout.close()

        fout = open(os.path.join(output_dir, 'truth.csv'), 'w')
        fout.write('window,truth,truth_label,in_transition\n')
        for w in self.windows:
            fout.write('%d,%s,%d,%d\n' % (w.index, w.truth, w.truth_label, w.in_transition))
        fout.close()

        fout = open(os.path.join(output_dir, 'jobs.csv'), 'w')
        fout.write('window,truth,config,runtime\n')
        for job in self.jobs:
            fout.write('%d,%s,%s,%r\n' % (job.window_index, job.truth, str(job.config).replace(',', ';'), job.runtime))
        fout.close()


def true_runtime(model, config, space, rng=None):
    """Job runtime of a workload under a configuration.

    Noise is drawn from rng when the model has runtime noise.
    """

    r = model.expected(space.indices(config), space.dimensions)
    if rng is not None and model.noise > 0:
        r += rng.normal(0.0, model.noise * model.base)

    return r


def ground_truth_optimum(model, space):
    """Exhaustive search for the noise-free optimum of a runtime model."""

    best = None
    for config in space.all_configs():
        r = true_runtime(model, config, space)
        if best is None or r < best[1]:
            best = (config, r)

    return best


class ClusterSimulator(object):
    """Generate telemetry and job runtimes window by window."""

    def __init__(self, scenario, seed=None):
        """Initialization.

        Parameters
        ----------
        scenario : Scenario
            Schedule, workload classes and configuration space.
        seed : int
            Seed overriding the scenario's seed.
        """

        self.logger = logging.getLogger('timestamp')

        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.space = scenario.space

        self.type_labels = {truth: i + 1 for i, truth in enumerate(scenario.truth_types())}
        self.plan = self._plan()

    @property
    def num_windows(self):
        return len(self.plan)

    def _segment_generators(self, segment):
        classes = [self.scenario.classes[c] for c in segment.classes]
        gens = []
        for c in classes:
            mean = np.array(c.mean, dtype=float)
            if segment.shift is not None:
                mean = mean + np.array(segment.shift)
            gens.append((mean, np.array(c.noise, dtype=float)))

        return tuple(gens)

    def _segment_runtime(self, segment):
        classes = [self.scenario.classes[c] for c in segment.classes]
        if segment.kind == 'hybrid':
            a, b = classes[0].runtime, classes[1].runtime
            return RuntimeModel((a.base + b.base) / 2.0,
                                tuple((oa + ob) // 2 for oa, ob in zip(a.optimal, b.optimal)),
                                tuple((wa + wb) / 2.0 for wa, wb in zip(a.weights, b.weights)),
                                max(a.noise, b.noise))

        model = classes[0].runtime
        if segment.optimal is not None:
            model = replace(model, optimal=segment.optimal)

        return model

    def _plan(self):
        plan = []
        prev_center = None
        for _ in range(self.scenario.repeat):
            for segment in self.scenario.schedule:
                gens = self._segment_generators(segment)
                center = np.mean([m for m, _ in gens], axis=0)
                ramp_noise = np.max([n for _, n in gens], axis=0)
                runtime = self._segment_runtime(segment)
                truth_label = self.type_labels[segment.truth]
                ramps = prev_center is not None and np.any(prev_center != center)

                for j in range(segment.windows):
                    t = len(plan)
                    if ramps and j < segment.transition:
                        mean = prev_center + (center - prev_center) * (j + 1) / float(segment.transition)
                        plan.append(WindowPlan(t, segment.truth, truth_label, True, ((mean, ramp_noise),), runtime))
                    else:
                        plan.append(WindowPlan(t, segment.truth, truth_label, False, gens, runtime))

                prev_center = center

        return plan

    def span(self, t):
        start = t * self.scenario.window_length
        return (start, start + self.scenario.window_length)

    def window_values(self, t):
        """Samples of window t from every agent.

        Returns
        -------
        numpy.ndarray
            Sample matrix, one row per sample.
        numpy.ndarray
            Timestamp of each row.
        list
            Source agent of each row.
        """

        wp = self.plan[t]
        rng = np.random.default_rng([self.seed, t])

        ticks = self.scenario.samples_per_window
        agents = self.scenario.agents
        num_samples = ticks * agents

        # samples alternate between the generators of a hybrid
        which = np.arange(num_samples) % len(wp.generators)
        means = np.array([wp.generators[g][0] for g in which])
        noise = np.array([wp.generators[g][1] for g in which])
        values = means + noise * rng.standard_normal(means.shape)

        start, _end = self.span(t)
        timestamps = start + (np.arange(num_samples) // agents) * self.scenario.sample_interval
        sources = ['agent-%d' % (k % agents) for k in range(num_samples)]

        return values, timestamps, sources

    def window_samples(self, t):
        values, timestamps, sources = self.window_values(t)
        return [RawSample(float(ts), src, tuple(float(v) for v in row))
                for ts, src, row in zip(timestamps, sources, values)]

    def observation_window(self, t):
        values, _timestamps, _sources = self.window_values(t)
        return window_from_values(values, t, self.span(t))

    def objective(self, t):
        """Measured job runtime of candidate configurations during window t."""

        model = self.plan[t].runtime
        rng = np.random.default_rng([self.seed, t, 2])

        return lambda config: true_runtime(model, config, self.space, rng)

    def rm_stub_step(self, t, choose_config):
        """Run the job starting at window t.

        Parameters
        ----------
        t : int
            Window index of the job boundary.
        choose_config : callable
            Called with the window index and the probe objective;
            returns the configuration for the job.

        Returns
        -------
        JobRecord
            Completion record of the job.
        """

        wp = self.plan[t]
        config = choose_config(t, self.objective(t))

        rng = np.random.default_rng([self.seed, t, 1])
        return JobRecord(t,
                         wp.truth,
                         config,
                         true_runtime(wp.runtime, config, self.space, rng),
                         true_runtime(wp.runtime, config, self.space),
                         true_runtime(wp.runtime, self.space.default, self.space),
                         true_runtime(wp.runtime, self.scenario.rule_of_thumb, self.space))

    def run(self):
        """Simulate the whole schedule with every job under the default configuration."""

        jobs = [self.rm_stub_step(t, lambda _t, _objective: self.space.default) for t in range(self.num_windows)]
        trace = SimulationTrace(self.plan, jobs)

        self.logger.info('Simulated %d windows of scenario %s.' % (self.num_windows, self.scenario.name))

        return trace


def run(scenario, seed=None):
    simulator = ClusterSimulator(scenario, seed)
    return simulator, simulator.run()
