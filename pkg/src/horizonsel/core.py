"""Core data types, series partitioning and demand-structure descriptors."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParams, InvalidSeries, SeriesTooShort


def popstd(values) -> float:
    """Population standard deviation (divides by n).

    Every coefficient of variation in the package goes through this helper so
    they all agree on the convention.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise InvalidParams("popstd of an empty sequence")
    return float(np.std(arr, ddof=0))


def average_ranks(values: Sequence[float], descending: bool = False) -> list[float]:
    """1-based ranks with ties sharing the mean of the positions they span."""
    n = len(values)
    idx = sorted(range(n), key=lambda i: -values[i] if descending else values[i])
    ranks = [0.0] * n
    start = 0
    while start < n:
        stop = start
        while stop + 1 < n and values[idx[stop + 1]] == values[idx[start]]:
            stop += 1
        shared = (start + stop) / 2.0 + 1.0
        for k in range(start, stop + 1):
            ranks[idx[k]] = shared
        start = stop + 1
    return ranks


def as_array(values) -> np.ndarray:
    return np.asarray(values, dtype=float).reshape(-1)


@dataclass(frozen=True)
class DemandSeries:
    id: str
    values: tuple
    seasonal_period: int = 1

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 3:
            raise InvalidSeries(f"series {self.id!r}: length {len(vals)} < 3")
        if not all(math.isfinite(v) for v in vals):
            raise InvalidSeries(f"series {self.id!r}: non-finite value")
        if any(v < 0 for v in vals):
            raise InvalidSeries(f"series {self.id!r}: negative value")
        if int(self.seasonal_period) != self.seasonal_period or self.seasonal_period < 1:
            raise InvalidSeries(f"series {self.id!r}: seasonal_period must be a positive integer")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class SplitConfig:
    train_ratio: float = 0.91
    future_horizon: int = 12

    def __post_init__(self):
        if not 0.0 < self.train_ratio < 1.0:
            raise InvalidParams(f"train_ratio must lie in (0, 1), got {self.train_ratio}")
        if int(self.future_horizon) != self.future_horizon or self.future_horizon < 1:
            raise InvalidParams(f"future_horizon must be a positive integer, got {self.future_horizon}")


@dataclass(frozen=True)
class EvaluationWindow:
    train: tuple
    test: tuple
    future_actual: tuple

    @property
    def observed(self) -> tuple:
        """Everything before the reserved future segment (train + test)."""
        return self.train + self.test


def _train_length(ratio: float, n: int) -> int:
    # round away representation noise such as 0.29 * 100 = 28.999999999999996
    return math.floor(round(ratio * n, 9))


def partition_series(series: DemandSeries, cfg: SplitConfig) -> EvaluationWindow:
    """Reserve the last H values as the future segment, then split the rest.

    The first ``floor(train_ratio * (T - H))`` observed values train the
    models; the remainder is the test slice.
    """
    T = len(series.values)
    H = cfg.future_horizon
    n = T - H
    if n < 4:
        raise SeriesTooShort(f"series {series.id!r}: T - H = {n} < 4")
    n_train = _train_length(cfg.train_ratio, n)
    if n_train < 2:
        raise SeriesTooShort(f"series {series.id!r}: train length {n_train} < 2")
    if n - n_train < 1:
        raise SeriesTooShort(f"series {series.id!r}: empty test slice")
    vals = series.values
    return EvaluationWindow(train=vals[:n_train], test=vals[n_train:n], future_actual=vals[n:])


class DemandClass(str, enum.Enum):
    REGULAR = "Regular"
    INTERMITTENT_OR_VARIABLE = "IntermittentOrVariable"


@dataclass(frozen=True)
class DemandStructure:
    """Frequency ``p`` and relative variability ``c`` of a demand history.

    ``c`` is None (and ``zero_mean`` set) for an all-zero history.
    """

    p: float
    c: Optional[float]
    classification: DemandClass
    zero_mean: bool = False

    @property
    def is_regular(self) -> bool:
        return self.classification is DemandClass.REGULAR


def demand_structure(
    series: DemandSeries | Sequence[float],
    p_star: float = 0.5,
    c_star: float = 0.7,
) -> DemandStructure:
    values = as_array(series.values if isinstance(series, DemandSeries) else series)
    if values.size == 0:
        raise InvalidParams("demand_structure of an empty series")
    if not 0.0 < p_star < 1.0:
        raise InvalidParams(f"p_star must lie in (0, 1), got {p_star}")
    if not c_star > 0.0:
        raise InvalidParams(f"c_star must be positive, got {c_star}")

    p = float(np.count_nonzero(values > 0)) / values.size
    mean = float(values.mean())
    if mean == 0.0:
        return DemandStructure(p=p, c=None, classification=DemandClass.INTERMITTENT_OR_VARIABLE, zero_mean=True)
    c = popstd(values) / mean
    regular = p >= p_star and c < c_star
    cls = DemandClass.REGULAR if regular else DemandClass.INTERMITTENT_OR_VARIABLE
    return DemandStructure(p=p, c=c, classification=cls)
