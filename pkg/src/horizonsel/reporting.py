"""CSV ingestion and the report tables written by the CLI."""
from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .core import DemandClass, DemandSeries, DemandStructure
from .errors import MalformedRow, NegativeValue, NonContiguousPeriods
from .pipeline import CorpusReport, SeriesEvaluation
from .selectors import ALL_SELECTORS, ModelMetricsRow, Selector, SelectorResult
from .stats import GroupedSample, compare_groups

INPUT_HEADER = ["series_id", "period", "value"]

METRICS_HEADER = [
    "series_id", "model_id", "mae", "rmse", "rmsse", "mape", "smape", "r2", "bias",
    "regime", "alpha", "alpha_source", "p", "c", "classification",
]
ADJUSTED_HEADER = ["series_id", "model_id", "h", "rmsse_h", "mae_h", "rmse_h"]
SELECTIONS_HEADER = ["series_id", "selector", "h", "chosen_model", "rank_json", "score"]
GRA_HEADER = ["series_id", "selector", "h", "gra"]
REPORT_HEADER = [
    "selector", "h", "count", "mean", "median", "std", "min", "max",
    "IQR", "MAD", "robust_cv", "gra_global", "final_ranking",
]
FREQUENCY_HEADER = ["selector", "h", "model_id", "count"]

OUTPUT_FILES = (
    "metrics.csv", "adjusted.csv", "selections.csv", "gra.csv",
    "report.csv", "frequency.csv", "stats.csv",
)


def fmt(value) -> str:
    """Six-decimal float formatting; ``None`` becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return ""
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _writer(path: Path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


# ------------------------------------------------------------------ ingestion


def ingest_csv(path, seasonal_period: int = 1) -> list[DemandSeries]:
    """Read a long-format ``series_id,period,value`` panel.

    Periods must form a contiguous 0-based index within each series; rows
    may appear in any order. Line numbers in errors count the header as 1.
    """
    by_series: dict[str, dict[int, float]] = defaultdict(dict)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != INPUT_HEADER:
            raise MalformedRow(1, f"header must be exactly {','.join(INPUT_HEADER)}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise MalformedRow(line, f"expected 3 fields, got {len(row)}")
            sid, period_s, value_s = (c.strip() for c in row)
            if not sid:
                raise MalformedRow(line, "empty series_id")
            try:
                period = int(period_s)
            except ValueError:
                raise MalformedRow(line, f"period {period_s!r} is not an integer") from None
            try:
                value = float(value_s)
            except ValueError:
                raise MalformedRow(line, f"value {value_s!r} is not a number") from None
            if not math.isfinite(value):
                raise MalformedRow(line, f"value {value_s!r} is not finite")
            if value < 0:
                raise NegativeValue(line, value)
            if period in by_series[sid]:
                raise MalformedRow(line, f"duplicate period {period} for series {sid!r}")
            by_series[sid][period] = value

    out = []
    for sid in sorted(by_series):
        periods = by_series[sid]
        expected = range(len(periods))
        if sorted(periods) != list(expected):
            raise NonContiguousPeriods(
                f"series {sid!r}: periods must be 0..{len(periods) - 1} without gaps"
            )
        out.append(DemandSeries(sid, tuple(periods[k] for k in expected), seasonal_period))
    return out


def write_input_csv(path, corpus: Sequence[DemandSeries]) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(INPUT_HEADER)
        for s in corpus:
            for k, v in enumerate(s.values):
                w.writerow([s.id, k, repr(float(v))])


# ------------------------------------------------------------------ reports


def _structure_cells(st: DemandStructure) -> list:
    return [st.p, st.c, st.classification.value]


def metrics_rows(evals: Sequence[SeriesEvaluation]):
    for e in evals:
        for mid in sorted(e.models):
            m = e.models[mid]
            ms = m.metrics
            yield [e.series_id, mid, ms.mae, ms.rmse, ms.rmsse, ms.mape, ms.smape, ms.r2, ms.bias,
                   m.regime.kind.value, m.params.alpha, m.params.source.value,
                   *_structure_cells(e.structure)]


def adjusted_rows(evals: Sequence[SeriesEvaluation]):
    for e in evals:
        for mid in sorted(e.models):
            for h, adj in sorted(e.models[mid].adjusted.items()):
                yield [e.series_id, mid, h, adj.rmsse_h, adj.mae_h, adj.rmse_h]


def _selection_row(series_id: str, res: SelectorResult) -> list:
    rank_json = json.dumps(dict(sorted(res.ranking.items())), separators=(",", ":"))
    return [series_id, res.selector.value, res.horizon, res.chosen, rank_json, res.score[res.chosen]]


def _ordered_keys(keys):
    return sorted(keys, key=lambda k: (ALL_SELECTORS.index(k[0]), k[1]))


def selections_rows(evals: Sequence[SeriesEvaluation]):
    for e in evals:
        for key in _ordered_keys(e.selections):
            yield _selection_row(e.series_id, e.selections[key])


def gra_rows(evals: Sequence[SeriesEvaluation]):
    for e in evals:
        for key in _ordered_keys(e.gra):
            value = e.gra[key]
            if value is not None:
                yield [e.series_id, key[0].value, key[1], value]


def report_rows(report: CorpusReport):
    for r in report.rows:
        yield [r.selector.value, r.h, r.count, r.mean, r.median, r.std, r.min, r.max,
               r.iqr, r.mad, r.robust_cv, r.gra_global, r.final_ranking]


def frequency_rows(report: CorpusReport):
    for (sel, h, model), count in report.frequency.items():
        yield [sel.value, h, model, count]


def stats_header(selectors: Sequence[Selector]) -> list[str]:
    pairs = [f"p_{a.value}_vs_{b.value}" for a, b in combinations(selectors, 2)]
    return ["h", "KW_H", "KW_p", *pairs]


def stats_rows(gra_cells: dict, selectors: Sequence[Selector], horizon: int, alpha: float = 0.05):
    """``gra_cells`` maps (Selector, h) to the list of present GRA values."""
    n_pairs = len(selectors) * (len(selectors) - 1) // 2
    for h in range(1, horizon + 1):
        groups = [(s.value, gra_cells.get((s, h), [])) for s in selectors]
        usable = (
            len(groups) >= 2
            and all(len(v) > 0 for _, v in groups)
            and sum(len(v) for _, v in groups) >= 3
        )
        if not usable:
            yield [h, None, None, *([None] * n_pairs)]
            continue
        rep = compare_groups(GroupedSample(tuple(groups)), alpha)
        yield [h, rep.H, rep.p_value, *[pw.p_bonferroni for pw in rep.pairwise]]


def gra_cells_from_evals(evals: Sequence[SeriesEvaluation]) -> dict:
    cells: dict = defaultdict(list)
    for e in sorted(evals, key=lambda e: e.series_id):
        for key in _ordered_keys(e.gra):
            if e.gra[key] is not None:
                cells[key].append(e.gra[key])
    return cells


def write_stats(path: Path, gra_cells: dict, selectors: Sequence[Selector], horizon: int) -> None:
    _write_rows(path, stats_header(selectors), stats_rows(gra_cells, selectors, horizon))


def write_all(outdir: Path, evals: Sequence[SeriesEvaluation], report: CorpusReport) -> None:
    outdir = Path(outdir)
    _write_rows(outdir / "metrics.csv", METRICS_HEADER, metrics_rows(evals))
    _write_rows(outdir / "adjusted.csv", ADJUSTED_HEADER, adjusted_rows(evals))
    _write_rows(outdir / "selections.csv", SELECTIONS_HEADER, selections_rows(evals))
    _write_rows(outdir / "gra.csv", GRA_HEADER, gra_rows(evals))
    _write_rows(outdir / "report.csv", REPORT_HEADER, report_rows(report))
    _write_rows(outdir / "frequency.csv", FREQUENCY_HEADER, frequency_rows(report))
    write_stats(outdir / "stats.csv", gra_cells_from_evals(evals), report.selectors, report.horizon)


# ------------------------------------------------------- re-reading outputs


def _opt_float(text: str) -> Optional[float]:
    return float(text) if text.strip() else None


def read_gra_csv(path) -> tuple[dict, int]:
    cells: dict = defaultdict(list)
    horizon = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != GRA_HEADER:
            raise MalformedRow(1, f"gra.csv header must be {','.join(GRA_HEADER)}")
        rows = sorted(reader, key=lambda r: (r["series_id"], r["selector"], int(r["h"])))
    for r in rows:
        h = int(r["h"])
        cells[(Selector(r["selector"]), h)].append(float(r["gra"]))
        horizon = max(horizon, h)
    return cells, horizon


def read_selection_inputs(adjusted_path, metrics_path, p_star: float = 0.5, c_star: float = 0.7):
    """Rebuild per-(series, h) selector tables from adjusted.csv and metrics.csv.

    Returns ``{series_id: (DemandStructure, {h: [ModelMetricsRow, ...]})}``.
    The demand class is re-derived from the stored ``p`` and ``c`` with the
    given thresholds.
    """
    raw: dict = {}
    structures: dict = {}
    with open(metrics_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != METRICS_HEADER:
            raise MalformedRow(1, f"metrics.csv header must be {','.join(METRICS_HEADER)}")
        for r in reader:
            sid = r["series_id"]
            raw[(sid, r["model_id"])] = r
            if sid not in structures:
                p, c = float(r["p"]), _opt_float(r["c"])
                regular = c is not None and p >= p_star and c < c_star
                cls = DemandClass.REGULAR if regular else DemandClass.INTERMITTENT_OR_VARIABLE
                structures[sid] = DemandStructure(p=p, c=c, classification=cls, zero_mean=c is None)

    tables: dict = defaultdict(lambda: defaultdict(list))
    with open(adjusted_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ADJUSTED_HEADER:
            raise MalformedRow(1, f"adjusted.csv header must be {','.join(ADJUSTED_HEADER)}")
        for line, r in enumerate(reader, start=2):
            key = (r["series_id"], r["model_id"])
            if key not in raw:
                raise MalformedRow(line, f"no metrics.csv row for {key}")
            m = raw[key]
            tables[r["series_id"]][int(r["h"])].append(ModelMetricsRow(
                model_id=r["model_id"],
                rmsse_h=float(r["rmsse_h"]),
                mae_h=float(r["mae_h"]),
                rmse_h=float(r["rmse_h"]),
                smape=_opt_float(m["smape"]),
                bias=_opt_float(m["bias"]),
                mape=_opt_float(m["mape"]),
                r2=_opt_float(m["r2"]),
            ))
    return {sid: (structures[sid], dict(tables[sid])) for sid in sorted(tables)}


def write_selections(path, results: Sequence[tuple[str, SelectorResult]]) -> None:
    _write_rows(Path(path), SELECTIONS_HEADER, (_selection_row(sid, res) for sid, res in results))
