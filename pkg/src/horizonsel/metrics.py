"""Test-window accuracy and bias metrics, plus the GRA volume-coherence score.

All functions take ``(actual, pred)`` in that order. Metrics that can be
undefined for a given input (MAPE on all-zero actuals, R2 on constant
actuals) return ``None`` rather than a sentinel number.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import EmptyInput, FlatTrainingSeries, LengthMismatch, ZeroTotalDemand


def _pair(actual, pred) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(actual, dtype=float).reshape(-1)
    yhat = np.asarray(pred, dtype=float).reshape(-1)
    if y.size != yhat.size:
        raise LengthMismatch(f"actual has {y.size} values, pred has {yhat.size}")
    if y.size == 0:
        raise EmptyInput("metric of empty sequences")
    return y, yhat


def mae(actual, pred) -> float:
    y, yhat = _pair(actual, pred)
    return float(np.mean(np.abs(y - yhat)))


def _rms(e: np.ndarray) -> float:
    # scaled by max |e| so tiny or huge errors neither underflow nor overflow
    m = float(np.max(np.abs(e)))
    if m == 0.0 or not math.isfinite(m):
        return m
    return m * math.sqrt(float(np.mean((e / m) ** 2)))


def rmse(actual, pred) -> float:
    y, yhat = _pair(actual, pred)
    return _rms(y - yhat)


def naive_scale(train) -> float:
    """RMS of one-step naive differences over the training sample."""
    x = np.asarray(train, dtype=float).reshape(-1)
    if x.size < 2:
        raise EmptyInput("RMSSE scaling needs at least 2 training values")
    return _rms(np.diff(x))


def rmsse(train, actual, pred) -> float:
    """Test RMSE divided by the in-sample naive RMS difference of ``train``."""
    scale = naive_scale(train)
    if scale == 0.0:
        raise FlatTrainingSeries("all training first differences are zero")
    return rmse(actual, pred) / scale


def mape(actual, pred) -> Optional[float]:
    """Mean absolute percentage error in percent, skipping zero actuals."""
    y, yhat = _pair(actual, pred)
    keep = y != 0
    if not keep.any():
        return None
    return float(100.0 * np.mean(np.abs((y[keep] - yhat[keep]) / y[keep])))


def smape(actual, pred) -> float:
    """Symmetric MAPE on the [0, 2] scale; a 0/0 term counts as 0."""
    y, yhat = _pair(actual, pred)
    num = 2.0 * np.abs(y - yhat)
    den = np.abs(y) + np.abs(yhat)
    terms = np.divide(num, den, out=np.zeros_like(num), where=den != 0)
    return float(np.mean(terms))


def r2(actual, pred) -> Optional[float]:
    y, yhat = _pair(actual, pred)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        return None
    sse = float(np.sum((y - yhat) ** 2))
    return 1.0 - sse / sst


def bias(actual, pred) -> float:
    """Mean of ``actual - pred``; negative means the model over-forecasts."""
    y, yhat = _pair(actual, pred)
    return float(np.mean(y - yhat))


def gra(actual, pred) -> float:
    """Global relative accuracy: ``1 - |sum(pred) - sum(actual)| / sum(actual)``."""
    y, yhat = _pair(actual, pred)
    total = float(np.sum(y))
    if total <= 0.0:
        raise ZeroTotalDemand("sum of actual demand is zero")
    return 1.0 - abs(float(np.sum(yhat)) - total) / total


@dataclass(frozen=True)
class MetricSet:
    mae: float
    rmse: float
    rmsse: float
    mape: Optional[float]
    smape: float
    r2: Optional[float]
    bias: float

    def as_dict(self) -> dict:
        return asdict(self)


METRIC_NAMES = ("mae", "rmse", "rmsse", "mape", "smape", "r2", "bias")


def metric_set(train, actual, pred) -> MetricSet:
    """All seven test metrics at once. Raises FlatTrainingSeries via RMSSE."""
    return MetricSet(
        mae=mae(actual, pred),
        rmse=rmse(actual, pred),
        rmsse=rmsse(train, actual, pred),
        mape=mape(actual, pred),
        smape=smape(actual, pred),
        r2=r2(actual, pred),
        bias=bias(actual, pred),
    )
