import os
import sys
import logging
from datetime import datetime

import click
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.logging import RichHandler
from groovebench.config import LOGGING_CONFIG, WORKERS
from groovebench.exceptions import GrooveError
from groovebench.numerics.matrix import read_grvm, write_grvm
from groovebench.utils.dataset_io import read_labels, load_dataset, save_dataset
from groovebench.utils.manifest import read_config, write_manifest, merge_options

# .env 파일 로드
load_dotenv()

logger = logging.getLogger(__name__)


def setup_logging(verbose: bool = False):
    """파일(ERROR) + 콘솔(INFO) 핸들러"""
    os.makedirs(LOGGING_CONFIG['dir'], exist_ok=True)
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    formatter = logging.Formatter(LOGGING_CONFIG['format'])

    file_handler = logging.FileHandler(os.path.join(LOGGING_CONFIG['dir'], LOGGING_CONFIG['file']))
    file_handler.setLevel(logging.ERROR)
    file_handler.setFormatter(formatter)

    if sys.stderr.isatty():
        stream_handler = RichHandler(show_path=False, rich_tracebacks=True)
    else:
        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(formatter)
    stream_handler.setLevel(logging.DEBUG if verbose else logging.INFO)

    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    root_logger.addHandler(file_handler)
    root_logger.addHandler(stream_handler)


def _section(config_path, name: str) -> dict:
    """설정 파일의 한 섹션 (파일이 없으면 빈 dict)"""
    if not config_path:
        return {}
    return dict(read_config(config_path).get(name) or {})


def _fail(action: str, e: Exception):
    logger.error(f"{action} 실패: {str(e)}", exc_info=True)
    raise click.ClickException(str(e))


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='DEBUG 로그 출력')
def cli(verbose):
    """GROOVE 표현 학습 + OT 정렬 벤치마크"""
    setup_logging(verbose)
    logger.debug(f"실행 시간: {datetime.now()}")


@cli.command()
@click.option('--setting', type=int, default=100, show_default=True, help='shared proportion (100/80/50)')
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--config', 'config_path', type=click.Path(exists=True), help='YAML 설정 (sim 섹션)')
@click.option('--cells', 'cells_per_condition', type=int, help='조건당 세포 수')
@click.option('--p-x', type=int, help='modality 1 피처 수')
@click.option('--p-y', type=int, help='modality 2 피처 수')
@click.option('--no-shuffle', is_flag=True, help='모달리티 셔플 끄기')
@click.option('--out', 'out_dir', required=True, type=click.Path(), help='데이터셋 디렉토리')
def simulate(setting, seed, config_path, cells_per_condition, p_x, p_y, no_shuffle, out_dir):
    """합성 약한 짝(weakly paired) 데이터셋 생성"""
    from groovebench.simulator import make_setting, simulate_dataset

    try:
        options = merge_options({}, _section(config_path, 'sim'), {
            'cells_per_condition': cells_per_condition, 'p_x': p_x, 'p_y': p_y,
            'shuffle': False if no_shuffle else None,
        })
        config = make_setting(setting, seed, **options)
        dataset = simulate_dataset(config)
        save_dataset(dataset, out_dir)
        write_manifest(os.path.join(out_dir, 'sim.yaml'), {
            'setting': setting,
            'config': config.model_dump(),
            'effects': len(dataset.truth.effects.effects),
        })
    except (GrooveError, ValidationError) as e:
        _fail("시뮬레이션", e)
    logger.info(f"데이터셋 저장 완료: {out_dir} (X {dataset.X.shape}, Y {dataset.Y.shape})")


@cli.command()
@click.option('--data', 'data_dir', required=True, type=click.Path(exists=True), help='데이터셋 디렉토리')
@click.option('--config', 'config_path', type=click.Path(exists=True), help='YAML 설정 (groove, train 섹션)')
@click.option('--kernel', type=click.Choice(['cosine', 'tdist']))
@click.option('--ablation', type=click.Choice(['full', 'no_groupclip', 'autoencoder_only']))
@click.option('--iterations', type=int)
@click.option('--batch-size', type=int)
@click.option('--seed', type=int)
@click.option('--out', 'out_dir', required=True, type=click.Path(), help='모델 디렉토리')
def train(data_dir, config_path, kernel, ablation, iterations, batch_size, seed, out_dir):
    """GROOVE 학습 후 모델과 임베딩(Z1.grvm, Z2.grvm) 저장"""
    from groovebench.groove.losses import groupclip_loss
    from groovebench.groove.model import GrooveHyper, encode, init_model
    from groovebench.groove.persist import save_model
    from groovebench.groove.trainer import TrainConfig, train as train_groove

    try:
        hyper = GrooveHyper(**merge_options({}, _section(config_path, 'groove'), {'kernel': kernel}))
        config = TrainConfig(**merge_options({}, _section(config_path, 'train'), {
            'ablation': ablation, 'iterations': iterations, 'batch_size': batch_size, 'seed': seed,
        }))
        dataset = load_dataset(data_dir)
        os.makedirs(out_dir, exist_ok=True)
        model = init_model(dataset.X.shape[1], dataset.Y.shape[1], hyper, config.seed)
        model, history = train_groove(model, dataset, config, os.path.join(out_dir, 'history.tsv'))

        Z1 = encode(model, dataset.X, 1)
        Z2 = encode(model, dataset.Y, 2)
        write_grvm(os.path.join(out_dir, 'Z1.grvm'), Z1)
        write_grvm(os.path.join(out_dir, 'Z2.grvm'), Z2)
        final = history[-1] if history else None
        save_model(model, out_dir, extra={
            'train': config.model_dump(),
            'final_step1': final.step1 if final else 'nan',
            'dataset_groupclip': groupclip_loss(Z1, Z2, dataset.labels_x, dataset.labels_y,
                                                hyper.kernel, hyper.tau, hyper.eta),
        })
    except (GrooveError, ValidationError) as e:
        _fail("GROOVE 학습", e)


@cli.command()
@click.option('--z1', required=True, type=click.Path(exists=True), help='modality 1 임베딩/행렬 GRVM')
@click.option('--z2', required=True, type=click.Path(exists=True), help='modality 2 임베딩/행렬 GRVM')
@click.option('--labels1', type=click.Path(exists=True), help='modality 1 라벨 (labeled_* 필수)')
@click.option('--labels2', type=click.Path(exists=True), help='modality 2 라벨 (labeled_* 필수)')
@click.option('--kind', type=click.Choice(['eot', 'egwot', 'labeled_eot', 'labeled_egwot', 'labeled_coot']))
@click.option('--epsilon', type=float, help='상대 엔트로피 정규화 강도')
@click.option('--config', 'config_path', type=click.Path(exists=True), help='YAML 설정 (align 섹션)')
@click.option('--out', 'out_dir', required=True, type=click.Path())
def align(z1, z2, labels1, labels2, kind, epsilon, config_path, out_dir):
    """두 표현을 OT로 정렬해 plan.grvm과 plan.yaml 저장"""
    from groovebench.ot_align import align as run_align
    from groovebench.ot_align.plan import AlignSpec

    try:
        spec = AlignSpec(**merge_options({}, _section(config_path, 'align'), {'kind': kind, 'epsilon': epsilon}))
        labels_a = read_labels(labels1) if labels1 else None
        labels_b = read_labels(labels2) if labels2 else None
        plan = run_align(read_grvm(z1), read_grvm(z2), spec, labels_a, labels_b)
        os.makedirs(out_dir, exist_ok=True)
        write_grvm(os.path.join(out_dir, 'plan.grvm'), plan.coupling)
        if plan.feature_plan is not None:
            write_grvm(os.path.join(out_dir, 'feature_plan.grvm'), plan.feature_plan.coupling)
        write_manifest(os.path.join(out_dir, 'plan.yaml'), plan.manifest())
    except (GrooveError, ValidationError) as e:
        _fail("정렬", e)
    logger.info(f"{spec.kind} 정렬 완료: {plan.shape}, 수렴={plan.converged}")


@cli.command()
@click.option('--plan', 'plan_path', required=True, type=click.Path(exists=True), help='학습 데이터 plan (n1×n2)')
@click.option('--data', 'data_dir', required=True, type=click.Path(exists=True), help='학습 데이터셋 디렉토리')
@click.option('--query', required=True, type=click.Path(exists=True), help='imputation할 소스 모달리티 GRVM')
@click.option('--direction', type=click.Choice(['1to2', '2to1']), default='2to1', show_default=True)
@click.option('--config', 'config_path', type=click.Path(exists=True), help='YAML 설정 (imputer 섹션)')
@click.option('--iterations', type=int)
@click.option('--seed', type=int)
@click.option('--out', 'out_path', required=True, type=click.Path(), help='출력 GRVM')
def impute(plan_path, data_dir, query, direction, config_path, iterations, seed, out_path):
    """plan으로 imputer를 학습해 query의 반대 모달리티 예측"""
    from groovebench.evaluate.imputer import ImputerConfig, impute as run_impute, train_imputer

    try:
        config = ImputerConfig(**merge_options({}, _section(config_path, 'imputer'),
                                               {'iterations': iterations, 'seed': seed}))
        dataset = load_dataset(data_dir)
        plan = read_grvm(plan_path)
        if direction == '2to1':
            model = train_imputer(plan, dataset.Y, dataset.X, config)
        else:
            model = train_imputer(plan.T, dataset.X, dataset.Y, config)
        write_grvm(out_path, run_impute(model, read_grvm(query)))
    except (GrooveError, ValidationError) as e:
        _fail("imputation", e)
    logger.info(f"imputation 저장 완료: {out_path}")


@cli.command()
@click.option('--plan', 'plan_path', type=click.Path(exists=True), help='test plan (참 짝이 대각선)')
@click.option('--x1', type=click.Path(exists=True), help='modality 1 test 데이터')
@click.option('--x2', type=click.Path(exists=True), help='modality 2 test 데이터')
@click.option('--truth', type=click.Path(exists=True), help='imputation 정답 GRVM')
@click.option('--pred', type=click.Path(exists=True), help='imputation 예측 GRVM')
@click.option('--k', 'knn_k', type=int, default=10, show_default=True)
@click.option('--method', default='method', show_default=True, help='표에 쓸 이름')
@click.option('--out', 'out_dir', required=True, type=click.Path())
def evaluate(plan_path, x1, x2, truth, pred, knn_k, method, out_dir):
    """매칭 / imputation 지표 계산 (metrics.csv + summary.txt)"""
    import csv
    from groovebench.evaluate.metrics import MetricReport, bary_foscttm, imputation_metrics, trace_metric
    from groovebench.report import render_table, table_rows

    try:
        metrics = {}
        if plan_path:
            plan = read_grvm(plan_path)
            metrics['trace'] = trace_metric(plan)
            if x1 and x2:
                metrics['bary_foscttm'] = bary_foscttm(plan, read_grvm(x1), read_grvm(x2))
        if truth and pred:
            metrics.update(imputation_metrics(read_grvm(truth), read_grvm(pred), k=knn_k))
        if not metrics:
            raise click.UsageError("--plan 또는 --truth/--pred 중 하나는 필요합니다")

        report = MetricReport()
        report.add(metrics)
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, 'metrics.csv'), 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['method', 'metric', 'fold', 'value'])
            writer.writerows(report.rows(method))
        names = list(report.summary())
        text = render_table(method, table_rows({method: report}, names), names)
        with open(os.path.join(out_dir, 'summary.txt'), 'w', encoding='utf-8') as f:
            f.write(text)
        click.echo(text)
    except GrooveError as e:
        _fail("평가", e)


@cli.command()
@click.option('--config', 'config_path', type=click.Path(exists=True), help='BenchGrid YAML')
@click.option('--output-dir', help='결과 디렉토리')
@click.option('--workers', type=int, default=WORKERS, show_default=True)
@click.option('--top-n', type=int, help='setting별 상위 N개만 표시')
def benchmark(config_path, output_dir, workers, top_n):
    """learner × aligner 조합 벤치마크 실행 후 리포트 작성"""
    from groovebench.bench_manager import BenchGrid, run_benchmark
    from groovebench.report import render_report

    logger.info("=" * 50)
    logger.info("벤치마크 시작...")
    try:
        grid = BenchGrid(**merge_options({}, read_config(config_path) if config_path else {},
                                         {'output_dir': output_dir}))
        report = run_benchmark(grid, workers, top_n)
    except (GrooveError, ValidationError) as e:
        _fail("벤치마크", e)
    click.echo(render_report(report, top_n))
    logger.info("=" * 50)
    logger.info(f"전체 벤치마크 완료! 셀 {len(report.records)}개 / 실패 {len(report.failures)}개")


@cli.command()
@click.option('--config', 'config_path', type=click.Path(exists=True), help='BenchGrid YAML (settings, seeds, 학습 설정)')
@click.option('--tau', 'taus', type=float, multiple=True, required=True, help='GroupCLIP 온도 (여러 번 지정)')
@click.option('--beta', 'betas', type=float, multiple=True, required=True, help='복원 가중치 (여러 번 지정)')
@click.option('--aligner', default='labeled_eot', show_default=True)
@click.option('--output-dir', help='결과 디렉토리')
@click.option('--workers', type=int, default=WORKERS, show_default=True)
def sweep(config_path, taus, betas, aligner, output_dir, workers):
    """tau × beta 민감도 스윕 (세 shared proportion 평균)"""
    from groovebench.bench_manager import BenchGrid
    from groovebench.sweep import sweep as run_sweep

    try:
        grid = BenchGrid(**merge_options({}, read_config(config_path) if config_path else {},
                                         {'output_dir': output_dir}))
        rows = run_sweep(taus, betas, grid, aligner, workers)
    except (GrooveError, ValidationError) as e:
        _fail("스윕", e)
    for row in rows:
        click.echo(f"tau={row['tau']:g}\tbeta={row['beta']:g}\t"
                   f"trace={row['trace']:.3f}\tbary_foscttm={row['bary_foscttm']:.3f}")


@cli.command()
@click.option('--results', 'results_dir', required=True, type=click.Path(exists=True), help='벤치마크 결과 디렉토리')
@click.option('--top-n', type=int, help='setting별 상위 N개만 표시')
def report(results_dir, top_n):
    """저장된 셀 결과로 리포트 다시 작성"""
    from groovebench.report import build_report, write_report

    try:
        text = write_report(build_report(results_dir), results_dir, top_n)
    except GrooveError as e:
        _fail("리포트", e)
    click.echo(text)


if __name__ == '__main__':
    cli()
