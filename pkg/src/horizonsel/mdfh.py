"""Metric degradation by forecast horizon (MDFH).

Test-window errors are projected to a future horizon with a power law,
``E(h_future) = E(h_test) * (h_future / h_test) ** alpha``, but only when the
trajectory that drives the diagnosis is structurally stable. Biased or
explosive trajectories keep their observed error.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import popstd
from .errors import InvalidHorizon, InvalidParams, TrajectoryTooShort

STABLE_CV = 0.2
BIASED_CV = 0.5
SECOND_DIFF_RATIO = 0.1

FALLBACK_ALPHA = 0.5
DEFAULT_BLOCK_SIZE = 3
DEFAULT_ALPHA_BOUNDS = (0.3, 0.9)


class Regime(str, enum.Enum):
    STABLE = "Stable"
    BIASED = "Biased"
    EXPLOSIVE = "Explosive"


class MetricKind(str, enum.Enum):
    MAE = "MAE"
    RMSE = "RMSE"
    RMSSE = "RMSSE"
    OTHER = "Other"

    @property
    def adjustable(self) -> bool:
        return self is not MetricKind.OTHER


class AlphaSource(str, enum.Enum):
    EMPIRICAL = "Empirical"
    FALLBACK = "Fallback"


@dataclass(frozen=True)
class StructuralRegime:
    kind: Regime
    cv_delta: float
    second_diff_mean: float


@dataclass(frozen=True)
class DegradationParams:
    alpha: float = FALLBACK_ALPHA
    source: AlphaSource = AlphaSource.FALLBACK
    block_size: int = DEFAULT_BLOCK_SIZE
    alpha_bounds: tuple = DEFAULT_ALPHA_BOUNDS


def diagnose_regime(trajectory: Sequence[float]) -> StructuralRegime:
    """Classify a trajectory as Stable, Biased or Explosive.

    Uses the coefficient of variation of the absolute first differences and
    the mean absolute second difference. A perfectly flat trajectory has no
    increments at all and is treated as Stable with ``cv_delta = 0``.
    """
    y = np.asarray(trajectory, dtype=float).reshape(-1)
    if y.size < 2:
        raise TrajectoryTooShort(f"need at least 2 points, got {y.size}")
    delta = np.diff(y)
    abs_delta = np.abs(delta)
    mean_delta = float(abs_delta.mean())
    second = float(np.abs(np.diff(delta)).mean()) if delta.size >= 2 else 0.0

    if mean_delta == 0.0:
        return StructuralRegime(Regime.STABLE, 0.0, second)

    cv = popstd(abs_delta) / mean_delta
    if cv < STABLE_CV and second < SECOND_DIFF_RATIO * mean_delta:
        kind = Regime.STABLE
    elif cv < BIASED_CV:
        kind = Regime.BIASED
    else:
        kind = Regime.EXPLOSIVE
    return StructuralRegime(kind, cv, second)


def estimate_alpha(
    test_actual: Sequence[float],
    test_pred: Sequence[float],
    block_size: int = DEFAULT_BLOCK_SIZE,
    bounds: tuple = DEFAULT_ALPHA_BOUNDS,
) -> DegradationParams:
    """Estimate the degradation exponent from block medians of test errors.

    Errors are cut into ``len // block_size`` contiguous blocks (any trailing
    remainder is dropped). The exponent is the log-ratio of the last and
    first block median errors over the log-ratio of their mean 1-based step
    indices, clipped to ``bounds``. Anything that prevents a finite estimate
    falls back to 0.5.
    """
    if block_size < 1:
        raise InvalidParams(f"block_size must be >= 1, got {block_size}")
    lo, hi = bounds
    if not lo <= hi:
        raise InvalidParams(f"alpha bounds out of order: {bounds}")
    fallback = DegradationParams(FALLBACK_ALPHA, AlphaSource.FALLBACK, block_size, (lo, hi))

    y = np.asarray(test_actual, dtype=float).reshape(-1)
    yhat = np.asarray(test_pred, dtype=float).reshape(-1)
    if y.size != yhat.size or y.size < 2 * block_size:
        return fallback

    errors = np.abs(y - yhat)
    n_blocks = errors.size // block_size
    if n_blocks < 2:
        return fallback
    blocks = errors[: n_blocks * block_size].reshape(n_blocks, block_size)
    steps = np.arange(1, n_blocks * block_size + 1, dtype=float).reshape(n_blocks, block_size)
    med_first, med_last = float(np.median(blocks[0])), float(np.median(blocks[-1]))
    h_first, h_last = float(steps[0].mean()), float(steps[-1].mean())

    if not (med_first > 0.0 and med_last > 0.0):
        return fallback
    alpha_raw = (math.log(med_last) - math.log(med_first)) / math.log(h_last / h_first)
    if not math.isfinite(alpha_raw):
        return fallback
    alpha = min(max(alpha_raw, lo), hi)
    return DegradationParams(alpha, AlphaSource.EMPIRICAL, block_size, (lo, hi))


def horizon_factor(h_test: int, h_future: int, alpha: float) -> float:
    if h_test < 1 or h_future < 1:
        raise InvalidHorizon(f"horizons must be >= 1, got h_test={h_test}, h_future={h_future}")
    return (h_future / h_test) ** alpha


def adjust_metric(
    trajectory: Sequence[float],
    metric_value: float,
    h_test: int,
    h_future: int,
    kind: MetricKind | str,
    params: DegradationParams,
    regime: StructuralRegime | None = None,
) -> float:
    """Project ``metric_value`` from the test horizon to ``h_future``.

    Returns the value untouched when the trajectory is too short to diagnose,
    the metric is not MAE/RMSE/RMSSE, or the regime is not Stable. Callers
    adjusting many metrics against one trajectory may pass its precomputed
    ``regime``.
    """
    if h_test < 1 or h_future < 1:
        raise InvalidHorizon(f"horizons must be >= 1, got h_test={h_test}, h_future={h_future}")
    kind = MetricKind(kind)
    if len(trajectory) < 2 or not kind.adjustable:
        return metric_value
    if regime is None:
        regime = diagnose_regime(trajectory)
    if regime.kind is not Regime.STABLE:
        return metric_value
    return metric_value * horizon_factor(h_test, h_future, params.alpha)


def mdfh(
    trajectory: Sequence[float],
    metric_value: float,
    h_test: int,
    h_future: int,
    metric_type: MetricKind | str,
    test_actual: Sequence[float] | None = None,
    test_pred: Sequence[float] | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
    alpha_bounds: tuple = DEFAULT_ALPHA_BOUNDS,
) -> float:
    """One-shot MDFH: estimate alpha from the test window, then adjust."""
    if test_actual is None or test_pred is None:
        params = DegradationParams(block_size=block_size, alpha_bounds=tuple(alpha_bounds))
    else:
        params = estimate_alpha(test_actual, test_pred, block_size, alpha_bounds)
    return adjust_metric(trajectory, metric_value, h_test, h_future, metric_type, params)
