"""Per-series evaluation and corpus-level aggregation.

For each series: split, fit every candidate on the training slice, score it
on the test slice, forecast the reserved future, project the horizon-aware
metrics with MDFH for every ``h`` in ``1..H``, run the selectors, and score
each selector's pick ex post with GRA.
"""
from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    DemandSeries,
    DemandStructure,
    EvaluationWindow,
    SplitConfig,
    demand_structure,
    partition_series,
)
from .errors import EmptyInput, FlatTrainingSeries, HorizonSelError, InvalidParams
from .forecasters import DEFAULT_FORECASTERS, ForecasterSpec, fit_forecast
from .mdfh import (
    DEFAULT_ALPHA_BOUNDS,
    DEFAULT_BLOCK_SIZE,
    DegradationParams,
    MetricKind,
    StructuralRegime,
    adjust_metric,
    diagnose_regime,
    estimate_alpha,
)
from .metrics import MetricSet, gra, mape, metric_set, r2, rmse, smape
from .selectors import ALL_SELECTORS, ModelMetricsRow, Selector, SelectorResult, run_selector

log = logging.getLogger(__name__)

DIAGNOSIS_SOURCES = ("future_forecast", "observed_history")
FUTURE_FITS = ("train_plus_test", "train_only")


@dataclass(frozen=True)
class PipelineOptions:
    block_size: int = DEFAULT_BLOCK_SIZE
    alpha_bounds: tuple = DEFAULT_ALPHA_BOUNDS
    diagnosis_source: str = "future_forecast"
    future_fit: str = "train_plus_test"
    p_star: float = 0.5
    c_star: float = 0.7
    selectors: tuple = ALL_SELECTORS
    era_body_variant: bool = False
    ahsiv_full_front_variant: bool = False

    def __post_init__(self):
        if self.diagnosis_source not in DIAGNOSIS_SOURCES:
            raise InvalidParams(f"diagnosis_source must be one of {DIAGNOSIS_SOURCES}")
        if self.future_fit not in FUTURE_FITS:
            raise InvalidParams(f"future_fit must be one of {FUTURE_FITS}")
        if self.block_size < 1:
            raise InvalidParams("block_size must be >= 1")
        lo, hi = self.alpha_bounds
        if not 0 < lo <= hi:
            raise InvalidParams(f"alpha bounds must satisfy 0 < min <= max, got {self.alpha_bounds}")
        object.__setattr__(self, "selectors", tuple(Selector(s) for s in self.selectors))
        if not self.selectors:
            raise InvalidParams("at least one selector must be enabled")


@dataclass(frozen=True)
class AdjustedMetrics:
    rmsse_h: float
    mae_h: float
    rmse_h: float


@dataclass
class ModelEvaluation:
    model_id: str
    metrics: MetricSet
    test_pred: np.ndarray
    trajectory: np.ndarray
    regime: StructuralRegime
    params: DegradationParams
    adjusted: dict = field(default_factory=dict)  # h -> AdjustedMetrics

    def row(self, h: int) -> ModelMetricsRow:
        adj = self.adjusted[h]
        m = self.metrics
        return ModelMetricsRow(
            model_id=self.model_id,
            rmsse_h=adj.rmsse_h,
            mae_h=adj.mae_h,
            rmse_h=adj.rmse_h,
            smape=m.smape,
            bias=m.bias,
            mape=m.mape,
            r2=m.r2,
        )


@dataclass
class SeriesEvaluation:
    series_id: str
    window: EvaluationWindow
    structure: DemandStructure
    models: dict  # model_id -> ModelEvaluation
    dropped: dict  # model_id -> reason
    selections: dict  # (Selector, h) -> SelectorResult
    gra: dict  # (Selector, h) -> Optional[float]

    @property
    def horizon(self) -> int:
        return len(self.window.future_actual)


def _test_metrics(train, test, pred) -> MetricSet:
    try:
        return metric_set(train, test, pred)
    except FlatTrainingSeries:
        # 0/0: a flat history forecast without error counts as a perfect score
        # (same convention as sMAPE); any nonzero error keeps the model out
        if rmse(test, pred) != 0.0:
            raise
        return MetricSet(
            mae=0.0, rmse=0.0, rmsse=0.0, mape=mape(test, pred), smape=smape(test, pred),
            r2=r2(test, pred), bias=0.0,
        )


def _evaluate_model(
    spec: ForecasterSpec,
    window: EvaluationWindow,
    seasonal_period: int,
    options: PipelineOptions,
) -> ModelEvaluation:
    train = np.asarray(window.train, dtype=float)
    test = np.asarray(window.test, dtype=float)
    observed = np.asarray(window.observed, dtype=float)
    H = len(window.future_actual)
    n_test = test.size

    test_pred = fit_forecast(spec, train, n_test, seasonal_period)
    metrics = _test_metrics(train, test, test_pred)

    if options.future_fit == "train_plus_test":
        trajectory = fit_forecast(spec, observed, H, seasonal_period)
    else:
        trajectory = fit_forecast(spec, train, n_test + H, seasonal_period)[n_test:]

    diag_source = trajectory if options.diagnosis_source == "future_forecast" else observed
    regime = diagnose_regime(diag_source)
    params = estimate_alpha(test, test_pred, options.block_size, options.alpha_bounds)

    adjusted = {}
    for h in range(1, H + 1):
        adj = [
            adjust_metric(diag_source, value, n_test, h, kind, params, regime=regime)
            for value, kind in (
                (metrics.rmsse, MetricKind.RMSSE),
                (metrics.mae, MetricKind.MAE),
                (metrics.rmse, MetricKind.RMSE),
            )
        ]
        adjusted[h] = AdjustedMetrics(*adj)
    return ModelEvaluation(spec.model_id, metrics, test_pred, trajectory, regime, params, adjusted)


def evaluate_series(
    series: DemandSeries,
    cfg: SplitConfig,
    forecasters: Sequence[ForecasterSpec] = DEFAULT_FORECASTERS,
    options: Optional[PipelineOptions] = None,
) -> SeriesEvaluation:
    """Run the full selection protocol on one series.

    A model whose fit or metrics fail (e.g. a flat training slice makes
    RMSSE undefined) is dropped with a warning; the series only fails when
    every model has been dropped.
    """
    options = options or PipelineOptions()
    if not forecasters:
        raise EmptyInput("no forecasters configured")
    ids = [f.model_id for f in forecasters]
    if len(set(ids)) != len(ids):
        raise InvalidParams(f"duplicate forecaster ids: {ids}")

    window = partition_series(series, cfg)
    # descriptors use observed data only; the reserved future stays unseen
    structure = demand_structure(window.observed, options.p_star, options.c_star)

    models: dict[str, ModelEvaluation] = {}
    dropped: dict[str, str] = {}
    last_error: Optional[HorizonSelError] = None
    for spec in forecasters:
        try:
            models[spec.model_id] = _evaluate_model(spec, window, series.seasonal_period, options)
        except HorizonSelError as exc:
            log.warning("series %s: dropping %s (%s)", series.id, spec.model_id, exc)
            dropped[spec.model_id] = f"{type(exc).__name__}: {exc}"
            last_error = exc
    if not models:
        raise type(last_error)(f"series {series.id!r}: every model failed; last error: {last_error}")

    future = np.asarray(window.future_actual, dtype=float)
    H = future.size
    selections: dict = {}
    gra_values: dict = {}
    for h in range(1, H + 1):
        rows = [models[m].row(h) for m in sorted(models)]
        actual_h = future[:h]
        has_volume = float(actual_h.sum()) > 0.0
        for sel in options.selectors:
            result = run_selector(
                sel, rows, structure, h,
                era_body_variant=options.era_body_variant,
                ahsiv_full_front_variant=options.ahsiv_full_front_variant,
            )
            selections[(sel, h)] = result
            if has_volume:
                gra_values[(sel, h)] = gra(actual_h, models[result.chosen].trajectory[:h])
            else:
                gra_values[(sel, h)] = None

    return SeriesEvaluation(series.id, window, structure, models, dropped, selections, gra_values)


def _evaluate_one(args):
    series, cfg, forecasters, options = args
    try:
        return evaluate_series(series, cfg, forecasters, options), None
    except HorizonSelError as exc:
        return None, (series.id, f"{type(exc).__name__}: {exc}")


def evaluate_corpus(
    corpus: Sequence[DemandSeries],
    cfg: SplitConfig,
    forecasters: Sequence[ForecasterSpec] = DEFAULT_FORECASTERS,
    options: Optional[PipelineOptions] = None,
    workers: int = 1,
) -> tuple[list[SeriesEvaluation], list[tuple[str, str]]]:
    """Evaluate every series; returns (evaluations sorted by id, failures).

    With ``workers > 1`` series are spread over a process pool. Results are
    identical to a serial run because each series is evaluated independently
    and the output is sorted by ``series_id``.
    """
    options = options or PipelineOptions()
    ids = [s.id for s in corpus]
    if len(set(ids)) != len(ids):
        raise InvalidParams("duplicate series ids in corpus")
    jobs = [(s, cfg, tuple(forecasters), options) for s in corpus]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_evaluate_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outcomes = [_evaluate_one(j) for j in jobs]

    evals = sorted((e for e, _ in outcomes if e is not None), key=lambda e: e.series_id)
    failures = sorted(f for _, f in outcomes if f is not None)
    for sid, reason in failures:
        log.warning("series %s skipped: %s", sid, reason)
    return evals, failures


# ---------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class ReportRow:
    selector: Selector
    h: int
    count: int
    mean: Optional[float]
    median: Optional[float]
    std: Optional[float]
    min: Optional[float]
    max: Optional[float]
    iqr: Optional[float]
    mad: Optional[float]
    robust_cv: Optional[float]
    gra_global: float
    final_ranking: int


@dataclass(frozen=True)
class CorpusReport:
    rows: tuple  # ReportRow, ordered by (h, selector order)
    frequency: dict  # (Selector, h, model_id) -> count
    selectors: tuple
    horizon: int

    def row(self, selector, h: int) -> ReportRow:
        selector = Selector(selector)
        for r in self.rows:
            if r.selector is selector and r.h == h:
                return r
        raise KeyError((selector, h))


def describe(values: Sequence[float]) -> dict:
    """Descriptive statistics used in the corpus report.

    ``std`` is the population standard deviation; quartiles use linear
    interpolation between order statistics; ``mad`` is the unscaled median
    absolute deviation; ``robust_cv`` is IQR / median.
    """
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        return dict(count=0, mean=None, median=None, std=None, min=None, max=None,
                    iqr=None, mad=None, robust_cv=None, total=0.0)
    total = float(np.sum(x))
    median = float(np.median(x))
    q1, q3 = np.percentile(x, [25.0, 75.0], method="linear")
    iqr = float(q3 - q1)
    return dict(
        count=int(x.size),
        mean=total / x.size,
        median=median,
        std=float(np.std(x, ddof=0)),
        min=float(x[0]),
        max=float(x[-1]),
        iqr=iqr,
        mad=float(np.median(np.abs(x - median))),
        robust_cv=iqr / median if median != 0 else None,
        total=total,
    )


def aggregate(evals: Sequence[SeriesEvaluation]) -> CorpusReport:
    """Corpus statistics per (selector, horizon) plus selection frequencies.

    Input order never matters: evaluations are sorted by ``series_id`` and
    values by magnitude before any summation.
    """
    if not evals:
        raise EmptyInput("aggregate of no evaluations")
    evals = sorted(evals, key=lambda e: e.series_id)
    horizons = {e.horizon for e in evals}
    if len(horizons) != 1:
        raise InvalidParams(f"inconsistent future horizons across series: {sorted(horizons)}")
    H = horizons.pop()
    selectors = []
    for e in evals:
        for sel, _ in e.selections:
            if sel not in selectors:
                selectors.append(sel)
    selectors = tuple(s for s in ALL_SELECTORS if s in selectors)

    rows = []
    frequency: Counter = Counter()
    for h in range(1, H + 1):
        stats = {}
        for sel in selectors:
            vals = [e.gra[(sel, h)] for e in evals if e.gra.get((sel, h)) is not None]
            stats[sel] = describe(vals)
            for e in evals:
                res = e.selections.get((sel, h))
                if res is not None:
                    frequency[(sel, h, res.chosen)] += 1
        order = sorted(selectors, key=lambda s: (-stats[s]["total"], s.value))
        final = {s: k for k, s in enumerate(order, start=1)}
        for sel in selectors:
            st = stats[sel]
            rows.append(ReportRow(
                selector=sel, h=h, count=st["count"], mean=st["mean"], median=st["median"],
                std=st["std"], min=st["min"], max=st["max"], iqr=st["iqr"], mad=st["mad"],
                robust_cv=st["robust_cv"], gra_global=st["total"], final_ranking=final[sel],
            ))
    freq = dict(sorted(frequency.items(), key=lambda kv: (kv[0][1], ALL_SELECTORS.index(kv[0][0]), kv[0][2])))
    return CorpusReport(tuple(rows), freq, selectors, H)


def modal_models(report: CorpusReport, selector) -> dict[int, str]:
    """Most frequently chosen model per horizon (ties to the smallest id)."""
    selector = Selector(selector)
    out = {}
    for h in range(1, report.horizon + 1):
        counts = {m: c for (s, hh, m), c in report.frequency.items() if s is selector and hh == h}
        if counts:
            out[h] = min(counts, key=lambda m: (-counts[m], m))
    return out
