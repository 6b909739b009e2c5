"""Model selectors over a per-model table of horizon-adjusted metrics.

Three selectors are provided:

* ``select_rmsse_h``: ascending order of the adjusted RMSSE.
* ``select_ahsiv``: regime-aware. Regular demand goes through a Pareto
  filter on (RMSSE, MAE) and a bias/sMAPE refinement; intermittent or highly
  variable demand falls back to minimum adjusted RMSSE.
* ``select_era``: sum of per-metric average ranks normalised to [0, 1].

All orderings break ties on ``model_id`` so a result never depends on the
order in which rows are supplied.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .core import DemandStructure, average_ranks
from .errors import EmptyInput, MissingMetric, NoUsableMetric


class Selector(str, enum.Enum):
    RMSSE_H = "RMSSE_h"
    AHSIV = "AHSIV"
    ERA = "ERA"


ALL_SELECTORS = (Selector.RMSSE_H, Selector.AHSIV, Selector.ERA)


@dataclass(frozen=True)
class ModelMetricsRow:
    model_id: str
    rmsse_h: Optional[float]
    mae_h: Optional[float]
    rmse_h: Optional[float]
    smape: Optional[float] = None
    bias: Optional[float] = None
    mape: Optional[float] = None
    r2: Optional[float] = None


@dataclass(frozen=True)
class SelectorResult:
    selector: Selector
    horizon: int
    ranking: Mapping[str, int]
    score: Mapping[str, float]
    chosen: str
    branch: Optional[str] = None  # AHSIV only: "pareto" or "conservative"

    def ordered(self) -> list[str]:
        return sorted(self.ranking, key=self.ranking.__getitem__)


def _present(value) -> bool:
    return value is not None and not (isinstance(value, float) and math.isnan(value))


def _check_rows(rows: Sequence[ModelMetricsRow], required: Sequence[str]) -> list[ModelMetricsRow]:
    rows = list(rows)
    if not rows:
        raise EmptyInput("no candidate models")
    ids = [r.model_id for r in rows]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate model_id in table: {ids}")
    for r in rows:
        for name in required:
            if not _present(getattr(r, name)):
                raise MissingMetric(f"{r.model_id}: {name} is missing")
    return sorted(rows, key=lambda r: r.model_id)


def _dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def pareto_front(points: Mapping[str, Sequence[float]]) -> set[str]:
    """Ids of points not dominated by any other point (minimisation)."""
    if not points:
        raise EmptyInput("pareto_front of no points")
    items = list(points.items())
    return {
        i for i, p in items
        if not any(_dominates(q, p) for j, q in items if j != i)
    }


def pareto_tiers(points: Mapping[str, Sequence[float]]) -> dict[str, int]:
    """Non-dominated peeling: tier 0 is the front, tier k the front of what is left."""
    if not points:
        raise EmptyInput("pareto_tiers of no points")
    remaining = dict(points)
    tiers: dict[str, int] = {}
    tier = 0
    while remaining:
        front = pareto_front(remaining)
        for i in front:
            tiers[i] = tier
            del remaining[i]
        tier += 1
    return tiers


def _ranks_from_order(order: Sequence[str]) -> dict[str, int]:
    return {m: k for k, m in enumerate(order, start=1)}


def select_rmsse_h(rows: Sequence[ModelMetricsRow], h: int) -> SelectorResult:
    rows = _check_rows(rows, ("rmsse_h",))
    order = sorted(rows, key=lambda r: (r.rmsse_h, r.model_id))
    ranking = _ranks_from_order([r.model_id for r in order])
    return SelectorResult(
        selector=Selector.RMSSE_H,
        horizon=h,
        ranking=ranking,
        score={r.model_id: float(r.rmsse_h) for r in rows},
        chosen=order[0].model_id,
    )


def _normalised_rank_scores(ranking: Mapping[str, int]) -> dict[str, float]:
    K = len(ranking)
    if K == 1:
        return {m: 0.0 for m in ranking}
    return {m: (r - 1) / (K - 1) for m, r in ranking.items()}


def select_ahsiv(
    rows: Sequence[ModelMetricsRow],
    structure: DemandStructure,
    h: int,
    full_front: bool = False,
) -> SelectorResult:
    """Regime-aware selection.

    Regular demand: models are ordered by (Pareto tier on rmsse_h/mae_h,
    rmsse_h, mae_h, model_id). The first two front members become candidates;
    they are sorted by sMAPE and the one with the smallest absolute bias wins.
    With ``full_front=True`` the whole front is searched lexicographically on
    (|bias|, sMAPE) instead.

    Intermittent or variable demand: minimum rmsse_h wins and the rest follow
    in (rmsse_h, model_id) order.

    Scores are ``(rank - 1) / (K - 1)`` so the chosen model scores 0.
    """
    if structure.is_regular:
        rows = _check_rows(rows, ("rmsse_h", "mae_h", "smape", "bias"))
        tiers = pareto_tiers({r.model_id: (r.rmsse_h, r.mae_h) for r in rows})
        order = sorted(rows, key=lambda r: (tiers[r.model_id], r.rmsse_h, r.mae_h, r.model_id))
        front = [r for r in order if tiers[r.model_id] == 0]
        candidates = front if full_front else front[:2]
        if full_front:
            chosen = min(candidates, key=lambda r: (abs(r.bias), r.smape, r.model_id))
        else:
            by_smape = sorted(candidates, key=lambda r: (r.smape, r.model_id))
            chosen = min(by_smape, key=lambda r: abs(r.bias))
        branch = "pareto"
    else:
        rows = _check_rows(rows, ("rmsse_h",))
        order = sorted(rows, key=lambda r: (r.rmsse_h, r.model_id))
        chosen = order[0]
        branch = "conservative"

    final = [chosen.model_id] + [r.model_id for r in order if r.model_id != chosen.model_id]
    ranking = _ranks_from_order(final)
    return SelectorResult(
        selector=Selector.AHSIV,
        horizon=h,
        ranking=ranking,
        score=_normalised_rank_scores(ranking),
        chosen=chosen.model_id,
        branch=branch,
    )


ERA_MIN_METRICS = ("mae_h", "rmse_h", "mape")
ERA_MAX_METRICS = ("r2",)
ERA_BODY_MIN_METRICS = ("mae_h", "rmse_h")


def select_era(rows: Sequence[ModelMetricsRow], h: int, body_variant: bool = False) -> SelectorResult:
    """Equilibrium rank aggregation.

    Each usable metric column is ranked (ascending for errors, descending
    for R2) with average ranks for ties. A column is usable only if every
    model has a value. Rank totals are min-max normalised to a score in
    [0, 1] where 1 is best; identical totals give everyone 1.
    ``body_variant`` drops MAPE from the error metrics.
    """
    rows = _check_rows(rows, ())
    mins = ERA_BODY_MIN_METRICS if body_variant else ERA_MIN_METRICS
    columns = [(m, False) for m in mins] + [(m, True) for m in ERA_MAX_METRICS]
    totals = [0.0] * len(rows)
    used = 0
    for name, descending in columns:
        vals = [getattr(r, name) for r in rows]
        if not all(_present(v) for v in vals):
            continue
        for i, rk in enumerate(average_ranks([float(v) for v in vals], descending=descending)):
            totals[i] += rk
        used += 1
    if used == 0:
        raise NoUsableMetric("none of the ERA metric columns is present for every model")

    lo, hi = min(totals), max(totals)
    if hi > lo:
        scores = [1.0 - (t - lo) / (hi - lo) for t in totals]
    else:
        scores = [1.0] * len(totals)
    ids = [r.model_id for r in rows]
    order = sorted(range(len(rows)), key=lambda i: (-scores[i], ids[i]))
    ranking = _ranks_from_order([ids[i] for i in order])
    return SelectorResult(
        selector=Selector.ERA,
        horizon=h,
        ranking=ranking,
        score=dict(zip(ids, scores)),
        chosen=ids[order[0]],
    )


def run_selector(
    selector: Selector | str,
    rows: Sequence[ModelMetricsRow],
    structure: DemandStructure,
    h: int,
    era_body_variant: bool = False,
    ahsiv_full_front_variant: bool = False,
) -> SelectorResult:
    selector = Selector(selector)
    if selector is Selector.RMSSE_H:
        return select_rmsse_h(rows, h)
    if selector is Selector.AHSIV:
        return select_ahsiv(rows, structure, h, full_front=ahsiv_full_front_variant)
    return select_era(rows, h, body_variant=era_body_variant)
