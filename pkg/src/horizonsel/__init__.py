"""Horizon-aware forecast model selection for demand series."""

from .core import (
    DemandClass,
    DemandSeries,
    DemandStructure,
    EvaluationWindow,
    SplitConfig,
    demand_structure,
    partition_series,
)
from .forecasters import DEFAULT_FORECASTERS, ForecasterKind, ForecasterSpec, fit_forecast
from .mdfh import adjust_metric, diagnose_regime, estimate_alpha, mdfh
from .metrics import MetricSet, bias, gra, mae, mape, metric_set, r2, rmse, rmsse, smape
from .pipeline import PipelineOptions, aggregate, evaluate_corpus, evaluate_series
from .selectors import (
    ModelMetricsRow,
    Selector,
    SelectorResult,
    pareto_front,
    pareto_tiers,
    select_ahsiv,
    select_era,
    select_rmsse_h,
)
from .stats import GroupedSample, dunn_posthoc, kruskal_wallis
from .synthetic import generate_synthetic, mixed_corpus

__version__ = "0.1.0"
