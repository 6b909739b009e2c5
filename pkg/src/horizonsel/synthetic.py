"""Seeded synthetic demand series for tests, benchmarks and the ``gen`` command."""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .core import DemandSeries
from .errors import InvalidParams

KINDS = ("stable_seasonal", "intermittent", "lumpy", "trending", "explosive")

_DEFAULTS = {
    "stable_seasonal": {"period": 12, "level": 100.0, "amplitude": 0.3, "noise": 0.05},
    "intermittent": {"q": 0.3, "mean_size": 4.0, "period": 12},
    "lumpy": {"q": 0.3, "sigma": 1.5, "scale": 5.0, "period": 12},
    "trending": {"level": 50.0, "slope": 0.5, "noise": 0.05, "period": 12},
    "explosive": {"start": 50.0, "volatility": 0.15, "period": 12},
}


def _params(kind: str, params: dict) -> dict:
    if kind not in _DEFAULTS:
        raise InvalidParams(f"unknown synthetic kind {kind!r}; expected one of {KINDS}")
    unknown = set(params) - set(_DEFAULTS[kind])
    if unknown:
        raise InvalidParams(f"{kind}: unknown parameters {sorted(unknown)}")
    return {**_DEFAULTS[kind], **params}


def generate_synthetic(kind: str, T: int, seed: int, series_id: str | None = None, **params) -> DemandSeries:
    """Draw one series of length ``T`` from the named generator.

    stable_seasonal
        ``level * (1 + amplitude * sin(2 pi t / period))`` times a uniform
        multiplicative noise in ``[1 - noise, 1 + noise]``. With ``noise=0``
        the series repeats exactly every ``period`` steps.
    intermittent
        Bernoulli(``q``) occurrence times a size of ``1 + Poisson(mean_size - 1)``.
    lumpy
        Bernoulli(``q``) occurrence times a lognormal size (``sigma`` controls
        the tail).
    trending
        Linear trend plus multiplicative noise.
    explosive
        Multiplicative random walk with log-volatility ``volatility``.
    """
    p = _params(kind, params)
    if int(T) != T or T < 20:
        raise InvalidParams(f"T must be an integer >= 20, got {T}")
    rng = np.random.default_rng(seed)
    t = np.arange(T)
    period = int(p["period"])
    if period < 1:
        raise InvalidParams("period must be >= 1")

    if kind == "stable_seasonal":
        if not 0 <= p["amplitude"] < 1 or not 0 <= p["noise"] < 1 or p["level"] <= 0:
            raise InvalidParams(f"stable_seasonal: invalid parameters {p}")
        phase = 2.0 * math.pi * (t % period) / period
        values = p["level"] * (1.0 + p["amplitude"] * np.sin(phase))
        if p["noise"] > 0:
            values = values * rng.uniform(1.0 - p["noise"], 1.0 + p["noise"], size=T)
    elif kind == "intermittent":
        if not 0 < p["q"] < 1 or p["mean_size"] < 1:
            raise InvalidParams(f"intermittent: invalid parameters {p}")
        occurs = rng.random(T) < p["q"]
        sizes = 1.0 + rng.poisson(p["mean_size"] - 1.0, size=T)
        values = np.where(occurs, sizes, 0.0)
    elif kind == "lumpy":
        if not 0 < p["q"] < 1 or p["sigma"] <= 0 or p["scale"] <= 0:
            raise InvalidParams(f"lumpy: invalid parameters {p}")
        occurs = rng.random(T) < p["q"]
        sizes = p["scale"] * rng.lognormal(0.0, p["sigma"], size=T)
        values = np.where(occurs, sizes, 0.0)
    elif kind == "trending":
        if p["level"] <= 0 or not 0 <= p["noise"] < 1:
            raise InvalidParams(f"trending: invalid parameters {p}")
        values = np.maximum(p["level"] + p["slope"] * t, 0.0)
        if p["noise"] > 0:
            values = values * rng.uniform(1.0 - p["noise"], 1.0 + p["noise"], size=T)
    else:
        if p["start"] <= 0 or p["volatility"] < 0:
            raise InvalidParams(f"explosive: invalid parameters {p}")
        steps = rng.normal(0.0, p["volatility"], size=T - 1)
        values = p["start"] * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))

    sid = series_id if series_id is not None else f"{kind}-{seed}"
    return DemandSeries(sid, tuple(float(v) for v in values), period)


def mixed_corpus(
    n_series: int,
    T: int,
    seed: int,
    kinds: Iterable[str] = KINDS,
    period: int = 12,
) -> list[DemandSeries]:
    """Round-robin over ``kinds``; series ``i`` uses seed ``seed * 100003 + i``."""
    kinds = tuple(kinds)
    if not kinds:
        raise InvalidParams("no synthetic kinds given")
    width = len(str(max(n_series - 1, 0)))
    out = []
    for i in range(n_series):
        kind = kinds[i % len(kinds)]
        out.append(generate_synthetic(
            kind, T, seed * 100003 + i, series_id=f"s{i:0{width}d}", period=period,
        ))
    return out
