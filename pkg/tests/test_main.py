import os
import json

import pytest
import yaml

from workloadtk.default_values import DefaultValues
from workloadtk.main import main
from workloadtk.windowing import to_analytic_window, rate_transform
from workloadtk.knowledge_base import KnowledgeBase
from workloadtk.training import load_models
from workloadtk.simulator.scenario import load_scenario, bundled_scenarios
from workloadtk.simulator.cluster import ClusterSimulator


def _error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def test_usage_error_exit_code(capsys):
    assert main(['run', 'three_plateaus']) == 2
    assert _error(capsys)['error'] == 'UsageError'

    assert main(['no_such_command']) == 2
    assert _error(capsys)['error'] == 'UsageError'


def test_missing_scenario_exit_code(tmp_path, capsys):
    assert main(['run', str(tmp_path / 'missing.yaml'), '--out', str(tmp_path / 'out')]) == 2

    error = _error(capsys)
    assert error['error'] == 'InvalidScenario'
    assert 'missing.yaml' in error['message']


def test_invalid_detection_policy_exit_code(tmp_path, capsys):
    with open(bundled_scenarios()['three_plateaus']) as f:
        record = yaml.safe_load(f)
    record['detection'] = {'min_features_rejecting': 20}
    scenario_file = tmp_path / 'strict.yaml'
    scenario_file.write_text(yaml.safe_dump(record))

    assert main(['run', str(scenario_file), '--out', str(tmp_path / 'out'), '--silent']) == 2
    assert _error(capsys)['error'] == 'InvalidScenario'


def test_report_without_run(tmp_path, capsys):
    assert main(['report', str(tmp_path)]) == 2
    assert _error(capsys)['error'] == 'NoReport'

    assert main(['report', str(tmp_path / 'absent')]) == 2
    assert _error(capsys)['error'] == 'NoReport'


def test_runtime_failure_exit_code(tmp_path, capsys):
    window_file = tmp_path / 'windows.jsonl'
    window_file.write_text('{"index": 0, "start": \n')

    assert main(['detect', str(window_file), str(tmp_path / 'transitions.tsv')]) == 3
    assert _error(capsys)['error'] == 'InvalidRecord'


def test_detect_missing_window_file(tmp_path, capsys):
    assert main(['detect', str(tmp_path / 'absent.jsonl'), str(tmp_path / 'out.tsv')]) == 2
    assert _error(capsys)['error'] == 'UsageError'


def test_run_then_report(tmp_path, capsys):
    out = str(tmp_path / 'run')

    assert main(['run', 'three_plateaus', '--out', out, '--seed', '11', '--silent']) == 0
    assert os.path.exists(os.path.join(out, DefaultValues.REPORT_FILE))
    assert os.path.exists(os.path.join(out, DefaultValues.LOG_FILE))
    capsys.readouterr()

    assert main(['report', out]) == 0
    lines = capsys.readouterr().out.splitlines()
    keys = [line.split('\t')[0] for line in lines]
    for metric in ('awt', 'purity', 'change_precision', 'change_recall', 'pred_acc_t1',
                   'pred_acc_t5', 'pred_acc_t10', 'total_probes', 'runtime_vs_default'):
        assert metric in keys
    assert 'awt\t1.0' in lines


def test_detect_discover_train(tmp_path):
    scenario = load_scenario(bundled_scenarios()['three_plateaus'])
    simulator = ClusterSimulator(scenario)

    window_file = tmp_path / 'windows.jsonl'
    with open(str(window_file), 'w') as fout:
        for t in range(90):
            fout.write(json.dumps(simulator.observation_window(t).to_record()) + '\n')

    output_file = tmp_path / 'transitions.tsv'
    assert main(['detect', str(window_file), str(output_file), '--alpha', '1e-4']) == 0
    transitions = [int(v) for v in output_file.read_text().split()]
    assert 60 in transitions and 61 in transitions

    kb = KnowledgeBase(str(tmp_path / 'kb'))
    analytic = [to_analytic_window(simulator.observation_window(t)) for t in range(90)]
    kb.append_many(DefaultValues.TRANSFORMATION_ZONE, DefaultValues.OBSERVATION_STREAM,
                   [simulator.observation_window(t).to_record() for t in range(90)])
    kb.append_many(DefaultValues.TRANSFORMATION_ZONE, DefaultValues.ANALYTIC_STREAM, [a.to_record() for a in analytic])
    kb.append_many(DefaultValues.TRANSFORMATION_ZONE, DefaultValues.RATE_STREAM,
                   [rate_transform(p, c).to_record() for p, c in zip(analytic, analytic[1:])])

    assert main(['discover', kb.kb_dir, '--batch-len', '45']) == 0
    assert KnowledgeBase(kb.kb_dir).workload_db.labels() == [1, 2]

    assert main(['train', kb.kb_dir]) == 0
    model_dir = kb.path(DefaultValues.ANALYTICS_ZONE, DefaultValues.MODEL_DIR)
    assert os.path.exists(os.path.join(model_dir, DefaultValues.WORKLOAD_MODEL_FILE))
    assert os.path.exists(os.path.join(model_dir, DefaultValues.PREDICTOR_MODEL_FILE))

    models = load_models(KnowledgeBase(kb.kb_dir))
    assert models.workload is not None and models.predictor is not None
    assert models.workload.predict(analytic[10].features)[0] == 1
    assert models.workload.predict(analytic[80].features)[0] == 2


@pytest.mark.parametrize('argv', [['--version'], ['run', '--help']])
def test_informational_flags_exit_cleanly(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 0
