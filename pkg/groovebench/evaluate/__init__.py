from groovebench.evaluate.imputer import (
    ImputerConfig, ImputerModel, draw_plan_targets, init_imputer, train_imputer, impute,
)
from groovebench.evaluate.metrics import (
    MATCHING_METRICS, IMPUTATION_METRICS, METRIC_NAMES, MetricReport,
    trace_metric, bary_foscttm, imputation_metrics, standard_error,
)
from groovebench.evaluate.ranking import METRIC_DIRECTIONS, mean_rank, top_two
