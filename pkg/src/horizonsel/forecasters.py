"""Baseline candidate forecasters.

Every model forecasts from a fixed origin: it sees ``history`` only and emits
``n`` steps without refitting inside the horizon.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import HistoryTooShort, InvalidParams

SES_GRID = (0.01,) + tuple(round(0.05 * k, 2) for k in range(1, 19))
SES_ALPHA_RANGE = (0.01, 0.9)


class ForecasterKind(str, enum.Enum):
    NAIVE = "Naive"
    SEASONAL_NAIVE = "SeasonalNaive"
    DRIFT = "Drift"
    MOVING_AVERAGE = "MovingAverage"
    SES = "SES"


@dataclass(frozen=True)
class ForecasterSpec:
    kind: ForecasterKind
    window: Optional[int] = None
    alpha: Union[float, str, None] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ForecasterKind(self.kind))
        if self.kind is ForecasterKind.MOVING_AVERAGE:
            w = 3 if self.window is None else self.window
            if int(w) != w or w < 1:
                raise InvalidParams(f"MovingAverage window must be a positive integer, got {w}")
            object.__setattr__(self, "window", int(w))
        if self.kind is ForecasterKind.SES:
            a = "auto" if self.alpha is None else self.alpha
            if a != "auto":
                a = float(a)
                lo, hi = SES_ALPHA_RANGE
                if not lo <= a <= hi:
                    raise InvalidParams(f"SES alpha must lie in [{lo}, {hi}] or be 'auto', got {a}")
            object.__setattr__(self, "alpha", a)

    @property
    def model_id(self) -> str:
        if self.kind is ForecasterKind.MOVING_AVERAGE:
            return f"MovingAverage[{self.window}]"
        if self.kind is ForecasterKind.SES:
            return f"SES[{self.alpha}]" if self.alpha != "auto" else "SES"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "ForecasterSpec":
        """Parse ``Kind`` or ``Kind:param`` (e.g. ``MovingAverage:6``, ``SES:0.3``)."""
        name, _, param = text.strip().partition(":")
        try:
            kind = ForecasterKind(name)
        except ValueError:
            raise InvalidParams(f"unknown forecaster {name!r}") from None
        if not param:
            return cls(kind)
        if kind is ForecasterKind.MOVING_AVERAGE:
            return cls(kind, window=int(param))
        if kind is ForecasterKind.SES:
            return cls(kind, alpha=param if param == "auto" else float(param))
        raise InvalidParams(f"forecaster {name!r} takes no parameter")


DEFAULT_FORECASTERS = (
    ForecasterSpec(ForecasterKind.NAIVE),
    ForecasterSpec(ForecasterKind.SEASONAL_NAIVE),
    ForecasterSpec(ForecasterKind.DRIFT),
    ForecasterSpec(ForecasterKind.MOVING_AVERAGE, window=3),
    ForecasterSpec(ForecasterKind.SES, alpha="auto"),
)


def ses_level(history: np.ndarray, alpha: float) -> float:
    # error-correction form of alpha*y + (1-alpha)*level; exact on constant input
    level = history[0]
    for y in history[1:]:
        level += alpha * (y - level)
    return float(level)


def ses_sse(history: np.ndarray, alpha: float) -> float:
    """In-sample one-step-ahead squared error of SES started at the first value."""
    level = history[0]
    sse = 0.0
    for y in history[1:]:
        err = y - level
        sse += err * err
        level += alpha * err
    return float(sse)


def select_ses_alpha(history, grid=SES_GRID) -> float:
    """Grid alpha with the smallest one-step SSE; ties go to the smaller alpha."""
    x = np.asarray(history, dtype=float)
    best_alpha, best_sse = None, math.inf
    for a in sorted(grid):
        sse = ses_sse(x, a)
        if sse < best_sse:
            best_alpha, best_sse = a, sse
    return best_alpha


def fit_forecast(spec: ForecasterSpec, history, n: int, seasonal_period: int = 1) -> np.ndarray:
    """Fit ``spec`` on ``history`` and return an ``n``-step forecast."""
    x = np.asarray(history, dtype=float).reshape(-1)
    if n < 1:
        raise InvalidParams(f"forecast length must be >= 1, got {n}")
    T = x.size
    if T < 2:
        raise HistoryTooShort(f"{spec.model_id}: history length {T} < 2")
    kind = spec.kind

    if kind is ForecasterKind.NAIVE:
        return np.full(n, x[-1])

    if kind is ForecasterKind.SEASONAL_NAIVE:
        m = int(seasonal_period)
        if m < 1:
            raise InvalidParams(f"seasonal_period must be >= 1, got {m}")
        if T < m:
            raise HistoryTooShort(f"{spec.model_id}: history length {T} < seasonal period {m}")
        last_cycle = x[T - m:]
        k = np.arange(n)
        return last_cycle[k % m].copy()

    if kind is ForecasterKind.DRIFT:
        slope = (x[-1] - x[0]) / (T - 1)
        return x[-1] + slope * np.arange(1, n + 1, dtype=float)

    if kind is ForecasterKind.MOVING_AVERAGE:
        w = spec.window
        if T < w:
            raise HistoryTooShort(f"{spec.model_id}: history length {T} < window {w}")
        return np.full(n, float(np.mean(x[T - w:])))

    if kind is ForecasterKind.SES:
        alpha = select_ses_alpha(x) if spec.alpha == "auto" else float(spec.alpha)
        return np.full(n, ses_level(x, alpha))

    raise InvalidParams(f"unsupported forecaster kind {kind!r}")
