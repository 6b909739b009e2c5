"""Command-line entry point.

    horizonsel run    --input panel.csv --output out/ [--config run.yaml] [flags]
    horizonsel select --adjusted out/adjusted.csv --metrics out/metrics.csv --output sel/
    horizonsel stats  --gra out/gra.csv --output st/
    horizonsel gen    --output panel.csv --n-series 100 --length 120 --seed 1
"""
from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
import tempfile
from pathlib import Path

from .config import build_config, load_config_file
from .errors import ConfigError, HorizonSelError
from .pipeline import aggregate, evaluate_corpus
from .reporting import (
    OUTPUT_FILES,
    ingest_csv,
    read_gra_csv,
    read_selection_inputs,
    write_all,
    write_input_csv,
    write_selections,
    write_stats,
)
from .selectors import ALL_SELECTORS, run_selector
from .synthetic import KINDS, mixed_corpus

log = logging.getLogger("horizonsel")

# flag dest -> config key
_RUN_FLAGS = {
    "input": "input",
    "output": "output",
    "train_ratio": "split.train_ratio",
    "horizon": "split.H",
    "seasonal_period": "seasonal_period",
    "selectors": "selectors",
    "era_body_variant": "era_body_variant",
    "ahsiv_full_front_variant": "ahsiv_full_front_variant",
    "block_size": "mdfh.block_size",
    "alpha_min": "mdfh.alpha_min",
    "alpha_max": "mdfh.alpha_max",
    "diagnosis_source": "mdfh.diagnosis_source",
    "future_fit": "future_fit",
    "forecasters": "forecasters",
    "p_star": "thresholds.p_star",
    "c_star": "thresholds.c_star",
    "seed": "seed",
    "workers": "workers",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat YAML config file; flags override it")
    p.add_argument("--train-ratio", type=float)
    p.add_argument("--horizon", "-H", type=int, help="future horizon H")
    p.add_argument("--seasonal-period", type=int)
    p.add_argument("--selectors", help="comma list of RMSSE_h,AHSIV,ERA")
    p.add_argument("--era-body-variant", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--ahsiv-full-front-variant", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--block-size", type=int)
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--diagnosis-source", choices=("future_forecast", "observed_history"))
    p.add_argument("--future-fit", choices=("train_plus_test", "train_only"))
    p.add_argument("--forecasters", help="comma list, e.g. Naive,SeasonalNaive,MovingAverage:3,SES:auto")
    p.add_argument("--p-star", type=float)
    p.add_argument("--c-star", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="horizonsel", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full pipeline on a series_id,period,value panel")
    run.add_argument("--input", "-i")
    run.add_argument("--output", "-o")
    _add_config_flags(run)

    sel = sub.add_parser("select", help="re-run selectors from adjusted.csv + metrics.csv")
    sel.add_argument("--adjusted", required=True)
    sel.add_argument("--metrics", required=True)
    sel.add_argument("--output", "-o", required=True)
    _add_config_flags(sel)

    st = sub.add_parser("stats", help="Kruskal-Wallis / Dunn tables from gra.csv")
    st.add_argument("--gra", required=True)
    st.add_argument("--output", "-o", required=True)
    st.add_argument("--selectors", help="comma list of RMSSE_h,AHSIV,ERA")

    gen = sub.add_parser("gen", help="write a synthetic corpus as an input CSV")
    gen.add_argument("--output", "-o", required=True)
    gen.add_argument("--n-series", type=int, default=100)
    gen.add_argument("--length", type=int, default=120)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--period", type=int, default=12)
    gen.add_argument("--kinds", default=",".join(KINDS))
    return parser


def resolve_config(args: argparse.Namespace):
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for dest, key in _RUN_FLAGS.items():
        flag = getattr(args, dest, None)
        if flag is not None:
            values[key] = flag
    return build_config(values)


def _fail(exc: Exception, command: str) -> int:
    summary = {"command": command, "error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        summary["field"] = exc.field
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 2 if isinstance(exc, ConfigError) else 1


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    if cfg.input is None:
        raise ConfigError("input", "an input CSV is required")
    if cfg.output is None:
        raise ConfigError("output", "an output directory is required")
    corpus = ingest_csv(cfg.input, cfg.seasonal_period)
    if not corpus:
        raise HorizonSelError(f"{cfg.input}: no series found")
    evals, failures = evaluate_corpus(corpus, cfg.split, cfg.forecasters, cfg.options, cfg.workers)
    if not evals:
        raise HorizonSelError(f"all {len(failures)} series failed; first: {failures[0][0]}: {failures[0][1]}")
    report = aggregate(evals)

    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    # stage into a sibling temp dir so a failure never leaves half-written tables
    staging = Path(tempfile.mkdtemp(prefix=".horizonsel-", dir=out))
    try:
        write_all(staging, evals, report)
        for name in OUTPUT_FILES:
            (staging / name).replace(out / name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    log.info("wrote %d series (%d skipped) to %s", len(evals), len(failures), out)
    for sid, reason in failures:
        print(f"skipped {sid}: {reason}", file=sys.stderr)
    return 0


def cmd_select(args) -> int:
    cfg = resolve_config(args)
    tables = read_selection_inputs(args.adjusted, args.metrics, cfg.p_star, cfg.c_star)
    results = []
    for sid, (structure, by_h) in tables.items():
        for sel in cfg.selectors:
            for h in sorted(by_h):
                results.append((sid, run_selector(
                    sel, by_h[h], structure, h,
                    era_body_variant=cfg.era_body_variant,
                    ahsiv_full_front_variant=cfg.ahsiv_full_front_variant,
                )))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_selections(out / "selections.csv", results)
    return 0


def cmd_stats(args) -> int:
    cells, horizon = read_gra_csv(args.gra)
    if args.selectors:
        values = build_config({"selectors": args.selectors})
        selectors = values.selectors
    else:
        present = {sel for sel, _ in cells}
        selectors = tuple(s for s in ALL_SELECTORS if s in present)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_stats(out / "stats.csv", cells, selectors, horizon)
    return 0


def cmd_gen(args) -> int:
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    corpus = mixed_corpus(args.n_series, args.length, args.seed, kinds, args.period)
    path = Path(args.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_input_csv(path, corpus)
    return 0


COMMANDS = {"run": cmd_run, "select": cmd_select, "stats": cmd_stats, "gen": cmd_gen}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (HorizonSelError, OSError) as exc:
        return _fail(exc, args.command)


if __name__ == "__main__":
    sys.exit(main())
