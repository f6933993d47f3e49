"""
벤치마크 결과 리포트

setting마다 매칭 / imputation 표를 mean rank 순으로 만든다.
값은 mean±SE (소수점 3자리), 열마다 최고는 **굵게**, 차선은 _밑줄_ 표시.
"""
import csv
import io
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from rich import box
from rich.console import Console
from rich.table import Table

from groovebench.evaluate.metrics import IMPUTATION_METRICS, MATCHING_METRICS, MetricReport
from groovebench.evaluate.ranking import mean_rank, top_two
from groovebench.exceptions import EmptyReportError
from groovebench.utils.result_store import ResultStore

logger = logging.getLogger(__name__)

REPORT_TEXT = 'report.txt'
REPORT_CSV = 'metrics.csv'
TABLE_WIDTH = 160

METRIC_TITLES = {
    'trace': 'Trace',
    'bary_foscttm': 'Bary. FOSCTTM',
    'mse': 'MSE',
    'wd': 'WD',
    'cos_sim': 'Cos-sim',
    'knn_recall': 'KNN Recall',
    'knn_pr': 'KNN PR',
    'knn_roc': 'KNN ROC',
}


@dataclass
class BenchmarkReport:
    """setting → method(learner+aligner) → MetricReport"""
    settings: Dict[str, Dict[str, MetricReport]] = field(default_factory=dict)
    records: List[Dict] = field(default_factory=list)
    failures: List[Dict] = field(default_factory=list)

    def methods(self, setting: str) -> List[str]:
        return sorted(self.settings[setting])


def _setting_order(name: str):
    # 시뮬레이션(숫자)은 큰 shared proportion부터, 그 뒤 데이터셋 이름순
    return (0, -int(name), '') if name.isdigit() else (1, 0, name)


def build_report(results_dir: str) -> BenchmarkReport:
    """
    결과 디렉토리의 셀 JSON을 모아 리포트 생성

    Raises:
        EmptyReportError: 완료된 셀이 없음
    """
    cells = os.path.join(results_dir, 'cells')
    records = list(ResultStore(results_dir).records()) if os.path.isdir(cells) else []
    if not records:
        raise EmptyReportError(f"{results_dir}: 완료된 셀 결과가 없습니다")

    records.sort(key=lambda r: (_setting_order(r['setting']), r['learner'], r['aligner'], r['seed'], r['fold']))
    report = BenchmarkReport(records=records)
    for record in records:
        method = f"{record['learner']}+{record['aligner']}"
        report.settings.setdefault(record['setting'], {}).setdefault(method, MetricReport()).add(record['metrics'])
    logger.info(f"리포트 생성: setting {len(report.settings)}개, 셀 {len(records)}개")
    return report


def format_value(mean: float, se: float) -> str:
    """SE 0.0005 미만은 0.000으로 표시된다"""
    return f"{mean:.3f}±{se:.3f}"


def table_rows(methods: Dict[str, MetricReport], metrics: Sequence[str],
               top_n: Optional[int] = None) -> List[List[str]]:
    """[method, mean rank, 지표...] 행 목록 (mean rank 순, 상위 top_n개)"""
    means = {method: {m: report.mean(m) for m in metrics} for method, report in methods.items()}
    ranked = mean_rank(means, metrics)
    if top_n:
        ranked = ranked[:top_n]

    names = [method for method, _ in ranked]
    cells = {method: [format_value(methods[method].mean(m), methods[method].se(m)) for m in metrics]
             for method in names}
    for col, metric in enumerate(metrics):
        best, second = top_two([means[method][metric] for method in names], metric)
        if best is not None:
            cells[names[best]][col] = f"**{cells[names[best]][col]}**"
        if second is not None:
            cells[names[second]][col] = f"_{cells[names[second]][col]}_"

    return [[method, f"{rank:.1f}", *cells[method]] for method, rank in ranked]


def render_table(title: str, rows: List[List[str]], metrics: Sequence[str]) -> str:
    table = Table(title=title, box=box.ASCII, title_justify='left')
    table.add_column("Method", no_wrap=True)
    table.add_column("Mean Rank", justify='right')
    for metric in metrics:
        table.add_column(METRIC_TITLES[metric], justify='right', no_wrap=True)
    for row in rows:
        table.add_row(*row)

    buffer = io.StringIO()
    console = Console(file=buffer, width=TABLE_WIDTH, color_system=None, force_terminal=False,
                      highlight=False, markup=False, emoji=False)
    console.print(table)
    return buffer.getvalue()


def render_report(report: BenchmarkReport, top_n: Optional[int] = None) -> str:
    parts = []
    for setting in sorted(report.settings, key=_setting_order):
        methods = report.settings[setting]
        label = f"{setting}% shared" if setting.isdigit() else setting
        for kind, metrics in (('matching', MATCHING_METRICS), ('imputation', IMPUTATION_METRICS)):
            present = [m for m in metrics if all(m in r.values for r in methods.values())]
            if not present:
                continue
            parts.append(render_table(f"{label} - {kind}", table_rows(methods, present, top_n), present))
    return "\n".join(parts)


def write_csv(report: BenchmarkReport, path: str) -> None:
    """(setting, method, metric, fold, seed, value) 긴 형식"""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['setting', 'method', 'metric', 'fold', 'seed', 'value'])
        for record in report.records:
            method = f"{record['learner']}+{record['aligner']}"
            for metric in MATCHING_METRICS + IMPUTATION_METRICS:
                if metric in record['metrics']:
                    writer.writerow([record['setting'], method, metric, record['fold'], record['seed'],
                                     repr(float(record['metrics'][metric]))])


def write_report(report: BenchmarkReport, output_dir: str, top_n: Optional[int] = None) -> str:
    """report.txt / metrics.csv 작성 후 텍스트 반환"""
    os.makedirs(output_dir, exist_ok=True)
    text = render_report(report, top_n)
    with open(os.path.join(output_dir, REPORT_TEXT), 'w', encoding='utf-8') as f:
        f.write(text)
    write_csv(report, os.path.join(output_dir, REPORT_CSV))
    logger.info(f"리포트 저장: {os.path.join(output_dir, REPORT_TEXT)}")
    return text
