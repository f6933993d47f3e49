import os

import pytest
from click.testing import CliRunner

from groovebench.main import cli
from groovebench.numerics.matrix import read_grvm
from groovebench.utils.manifest import read_config

SMALL_CONFIG = """\
groove:
  latent_dim: 4
  encoder_hidden:
  - 8
  decoder_hidden:
  - 8
train:
  batch_size: 20
  iterations: 2
imputer:
  hidden:
  - 8
  batch_size: 16
"""


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / 'config.yaml').write_text(SMALL_CONFIG, encoding='utf-8')
    return tmp_path


def _invoke(*args):
    result = CliRunner().invoke(cli, [str(a) for a in args])
    assert result.exit_code == 0, result.output
    return result


def test_simulate_train_align_evaluate(workspace):
    data = workspace / 'data'
    _invoke('simulate', '--setting', 80, '--seed', 1, '--cells', 10, '--p-x', 12, '--p-y', 8, '--out', data)
    assert read_grvm(data / 'X.grvm').shape == (100, 12)
    assert read_config(data / 'sim.yaml')['setting'] == '80'

    model = workspace / 'model'
    _invoke('train', '--data', data, '--config', workspace / 'config.yaml', '--out', model)
    assert read_grvm(model / 'Z1.grvm').shape == (100, 4)
    assert (model / 'history.tsv').exists()
    assert 'dataset_groupclip' in read_config(model / 'manifest.yaml')

    aligned = workspace / 'aligned'
    _invoke('align', '--z1', model / 'Z1.grvm', '--z2', model / 'Z2.grvm',
            '--labels1', data / 'labels_x.txt', '--labels2', data / 'labels_y.txt',
            '--kind', 'labeled_eot', '--out', aligned)
    plan = read_grvm(aligned / 'plan.grvm')
    assert plan.shape == (100, 100)
    assert plan.sum() == pytest.approx(1.0, abs=1e-4)
    assert read_config(aligned / 'plan.yaml')['kind'] == 'labeled_eot'

    imputed = workspace / 'imputed.grvm'
    _invoke('impute', '--plan', aligned / 'plan.grvm', '--data', data, '--query', data / 'Y.grvm',
            '--config', workspace / 'config.yaml', '--iterations', 2, '--out', imputed)
    assert read_grvm(imputed).shape == (100, 12)

    result = _invoke('evaluate', '--plan', aligned / 'plan.grvm', '--x1', data / 'X.grvm', '--x2', data / 'Y.grvm',
                     '--truth', data / 'X.grvm', '--pred', imputed, '--k', 3, '--out', workspace / 'eval')
    assert 'Trace' in result.output
    assert (workspace / 'eval' / 'metrics.csv').exists()
    assert (workspace / 'eval' / 'summary.txt').exists()


def test_align_coot_writes_feature_plan(workspace, gen):
    from groovebench.numerics.matrix import write_grvm
    from groovebench.utils.dataset_io import write_labels

    write_grvm(workspace / 'a.grvm', gen.normal(size=(6, 3)))
    write_grvm(workspace / 'b.grvm', gen.normal(size=(6, 4)))
    write_labels(workspace / 'la.txt', [0, 0, 0, 1, 1, 1])
    write_labels(workspace / 'lb.txt', [0, 0, 1, 1, 1, 0])
    _invoke('align', '--z1', workspace / 'a.grvm', '--z2', workspace / 'b.grvm',
            '--labels1', workspace / 'la.txt', '--labels2', workspace / 'lb.txt',
            '--kind', 'labeled_coot', '--epsilon', 0.1, '--out', workspace / 'out')
    assert read_grvm(workspace / 'out' / 'feature_plan.grvm').shape == (3, 4)


def test_labeled_align_without_labels_fails(workspace, gen):
    from groovebench.numerics.matrix import write_grvm

    write_grvm(workspace / 'a.grvm', gen.normal(size=(4, 2)))
    result = CliRunner().invoke(cli, ['align', '--z1', str(workspace / 'a.grvm'), '--z2', str(workspace / 'a.grvm'),
                                      '--kind', 'labeled_eot', '--out', str(workspace / 'out')])
    assert result.exit_code != 0
    assert os.path.exists(workspace / 'logs' / 'groovebench.log')


def test_report_command(workspace):
    from groovebench.utils.result_store import ResultStore

    store = ResultStore(str(workspace / 'results'))
    key = store.cell_key('100', 'groove_cosine', 'eot', 0, 0)
    store.save(key, {'setting': '100', 'learner': 'groove_cosine', 'aligner': 'eot', 'fold': 0, 'seed': 0,
                     'metrics': {'trace': 0.25, 'bary_foscttm': 0.4}})
    result = _invoke('report', '--results', workspace / 'results')
    assert 'groove_cosine+eot' in result.output
    assert (workspace / 'results' / 'report.txt').exists()


def test_benchmark_command(workspace):
    config = workspace / 'grid.yaml'
    config.write_text("""\
learners:
- groove_cosine
aligners:
- labeled_eot
settings:
- 100
seeds:
- 0
knn_k: 3
imputation: false
groove:
  latent_dim: 4
  encoder_hidden:
  - 8
  decoder_hidden:
  - 8
train:
  batch_size: 8
  iterations: 2
sim:
  cells_per_condition: 10
  p_x: 12
  p_y: 8
  n_perturbations: 2
""", encoding='utf-8')
    result = _invoke('benchmark', '--config', config, '--output-dir', workspace / 'bench', '--workers', 1)
    assert 'groove_cosine+labeled_eot' in result.output
    assert len(os.listdir(workspace / 'bench' / 'cells')) == 1
    assert (workspace / 'bench' / 'report.txt').exists()
