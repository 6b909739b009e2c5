"""Run configuration: a flat ``key: value`` YAML file plus CLI overrides.

Keys::

    input, output, seasonal_period, seed, workers
    split.train_ratio, split.H
    selectors, era_body_variant, ahsiv_full_front_variant
    mdfh.block_size, mdfh.alpha_min, mdfh.alpha_max, mdfh.diagnosis_source
    future_fit, forecasters
    thresholds.p_star, thresholds.c_star
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .core import SplitConfig
from .errors import ConfigError, HorizonSelError
from .forecasters import DEFAULT_FORECASTERS, ForecasterSpec
from .pipeline import DIAGNOSIS_SOURCES, FUTURE_FITS, PipelineOptions
from .selectors import ALL_SELECTORS, Selector

KNOWN_KEYS = (
    "input", "output", "seasonal_period", "seed", "workers",
    "split.train_ratio", "split.H",
    "selectors", "era_body_variant", "ahsiv_full_front_variant",
    "mdfh.block_size", "mdfh.alpha_min", "mdfh.alpha_max", "mdfh.diagnosis_source",
    "future_fit", "forecasters",
    "thresholds.p_star", "thresholds.c_star",
)


@dataclass(frozen=True)
class RunConfig:
    input: Optional[Path] = None
    output: Optional[Path] = None
    train_ratio: float = 0.91
    horizon: int = 12
    seasonal_period: int = 12
    selectors: tuple = ALL_SELECTORS
    era_body_variant: bool = False
    ahsiv_full_front_variant: bool = False
    block_size: int = 3
    alpha_min: float = 0.3
    alpha_max: float = 0.9
    diagnosis_source: str = "future_forecast"
    future_fit: str = "train_plus_test"
    forecasters: tuple = field(default=DEFAULT_FORECASTERS)
    p_star: float = 0.5
    c_star: float = 0.7
    seed: int = 0
    workers: int = 1

    @property
    def split(self) -> SplitConfig:
        return SplitConfig(self.train_ratio, self.horizon)

    @property
    def options(self) -> PipelineOptions:
        return PipelineOptions(
            block_size=self.block_size,
            alpha_bounds=(self.alpha_min, self.alpha_max),
            diagnosis_source=self.diagnosis_source,
            future_fit=self.future_fit,
            p_star=self.p_star,
            c_star=self.c_star,
            selectors=self.selectors,
            era_body_variant=self.era_body_variant,
            ahsiv_full_front_variant=self.ahsiv_full_front_variant,
        )


def _as_list(value) -> list:
    if isinstance(value, str):
        return [v for v in (s.strip() for s in value.split(",")) if v]
    return list(value)


def _bool(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "yes", "1", "false", "no", "0"):
        return value.lower() in ("true", "yes", "1")
    raise ConfigError(key, f"expected a boolean, got {value!r}")


def _int(key: str, value, minimum: int) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an integer, got {value!r}") from None
    if isinstance(value, float) and value != out:
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if out < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {out}")
    return out


def _float(key: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}") from None


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"invalid YAML in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("--config", "top level must be a mapping of flat keys")
    return data


def build_config(values: Mapping[str, Any]) -> RunConfig:
    """Validate a flat key mapping into a RunConfig; errors name the key."""
    unknown = sorted(set(values) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    kw: dict = {}
    v = values.get
    if v("input") is not None:
        kw["input"] = Path(v("input"))
    if v("output") is not None:
        kw["output"] = Path(v("output"))
    if v("split.train_ratio") is not None:
        r = _float("split.train_ratio", v("split.train_ratio"))
        if not 0 < r < 1:
            raise ConfigError("split.train_ratio", f"must lie in (0, 1), got {r}")
        kw["train_ratio"] = r
    if v("split.H") is not None:
        kw["horizon"] = _int("split.H", v("split.H"), 1)
    if v("seasonal_period") is not None:
        kw["seasonal_period"] = _int("seasonal_period", v("seasonal_period"), 1)
    if v("seed") is not None:
        kw["seed"] = _int("seed", v("seed"), 0)
    if v("workers") is not None:
        kw["workers"] = _int("workers", v("workers"), 1)
    if v("selectors") is not None:
        try:
            sels = tuple(Selector(s) for s in _as_list(v("selectors")))
        except ValueError as exc:
            raise ConfigError("selectors", str(exc)) from None
        if not sels:
            raise ConfigError("selectors", "at least one selector is required")
        kw["selectors"] = tuple(s for s in ALL_SELECTORS if s in sels)
    for key in ("era_body_variant", "ahsiv_full_front_variant"):
        if v(key) is not None:
            kw[key] = _bool(key, v(key))
    if v("mdfh.block_size") is not None:
        kw["block_size"] = _int("mdfh.block_size", v("mdfh.block_size"), 1)
    if v("mdfh.alpha_min") is not None:
        kw["alpha_min"] = _float("mdfh.alpha_min", v("mdfh.alpha_min"))
    if v("mdfh.alpha_max") is not None:
        kw["alpha_max"] = _float("mdfh.alpha_max", v("mdfh.alpha_max"))
    lo, hi = kw.get("alpha_min", 0.3), kw.get("alpha_max", 0.9)
    if not 0 < lo <= hi:
        raise ConfigError("mdfh.alpha_min", f"need 0 < alpha_min <= alpha_max, got {lo}, {hi}")
    if v("mdfh.diagnosis_source") is not None:
        if v("mdfh.diagnosis_source") not in DIAGNOSIS_SOURCES:
            raise ConfigError("mdfh.diagnosis_source", f"must be one of {DIAGNOSIS_SOURCES}")
        kw["diagnosis_source"] = v("mdfh.diagnosis_source")
    if v("future_fit") is not None:
        if v("future_fit") not in FUTURE_FITS:
            raise ConfigError("future_fit", f"must be one of {FUTURE_FITS}")
        kw["future_fit"] = v("future_fit")
    if v("forecasters") is not None:
        try:
            specs = tuple(ForecasterSpec.parse(str(s)) for s in _as_list(v("forecasters")))
        except (HorizonSelError, ValueError) as exc:
            raise ConfigError("forecasters", str(exc)) from None
        if not specs:
            raise ConfigError("forecasters", "at least one forecaster is required")
        ids = [s.model_id for s in specs]
        if len(set(ids)) != len(ids):
            raise ConfigError("forecasters", f"duplicate forecasters: {ids}")
        kw["forecasters"] = specs
    if v("thresholds.p_star") is not None:
        p = _float("thresholds.p_star", v("thresholds.p_star"))
        if not 0 < p < 1:
            raise ConfigError("thresholds.p_star", f"must lie in (0, 1), got {p}")
        kw["p_star"] = p
    if v("thresholds.c_star") is not None:
        c = _float("thresholds.c_star", v("thresholds.c_star"))
        if not c > 0:
            raise ConfigError("thresholds.c_star", f"must be positive, got {c}")
        kw["c_star"] = c
    return RunConfig(**kw)
