import csv
import json
from pathlib import Path

import pytest

from horizonsel.cli import main
from horizonsel.config import build_config
from horizonsel.errors import ConfigError, MalformedRow, NegativeValue, NonContiguousPeriods
from horizonsel.reporting import (
    ADJUSTED_HEADER,
    FREQUENCY_HEADER,
    GRA_HEADER,
    METRICS_HEADER,
    OUTPUT_FILES,
    REPORT_HEADER,
    SELECTIONS_HEADER,
    fmt,
    ingest_csv,
)
from horizonsel.synthetic import mixed_corpus
from horizonsel.reporting import write_input_csv

HEADERS = {
    "metrics.csv": METRICS_HEADER,
    "adjusted.csv": ADJUSTED_HEADER,
    "selections.csv": SELECTIONS_HEADER,
    "gra.csv": GRA_HEADER,
    "report.csv": REPORT_HEADER,
    "frequency.csv": FREQUENCY_HEADER,
}


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------- ingestion


def test_ingest_two_rows(tmp_path):
    (s,) = ingest_csv(write(tmp_path / "a.csv", "series_id,period,value\ns1,0,3\ns1,1,4\ns1,2,5\n"))
    assert s.id == "s1" and s.values == (3.0, 4.0, 5.0)


def test_ingest_interleaved(tmp_path):
    text = "series_id,period,value\ns2,1,20\ns1,0,1\ns2,0,10\ns1,2,3\ns2,2,30\ns1,1,2\n"
    s1, s2 = ingest_csv(write(tmp_path / "a.csv", text), seasonal_period=4)
    assert (s1.id, s1.values) == ("s1", (1.0, 2.0, 3.0))
    assert (s2.id, s2.values) == ("s2", (10.0, 20.0, 30.0))
    assert s1.seasonal_period == 4


@pytest.mark.parametrize("text,exc,line", [
    ("series_id,period,value\ns1,0,-1\n", NegativeValue, 2),
    ("id,period,value\ns1,0,1\n", MalformedRow, 1),
    ("series_id,period,value\ns1,0,1\ns1,x,2\n", MalformedRow, 3),
    ("series_id,period,value\ns1,0,1\ns1,1\n", MalformedRow, 3),
    ("series_id,period,value\ns1,0,1\ns1,0,2\n", MalformedRow, 3),
    ("series_id,period,value\ns1,0,nan\n", MalformedRow, 2),
])
def test_ingest_errors(tmp_path, text, exc, line):
    with pytest.raises(exc) as info:
        ingest_csv(write(tmp_path / "a.csv", text))
    assert info.value.line == line


def test_ingest_gap(tmp_path):
    with pytest.raises(NonContiguousPeriods):
        ingest_csv(write(tmp_path / "a.csv", "series_id,period,value\ns1,0,1\ns1,2,1\ns1,3,1\n"))


def test_fmt():
    assert fmt(1 / 3) == "0.333333"
    assert fmt(-1e-9) == "0.000000"
    assert fmt(None) == "" and fmt(7) == "7"


# --------------------------------------------------------------- run


@pytest.fixture
def panel(tmp_path):
    path = tmp_path / "panel.csv"
    write_input_csv(path, mixed_corpus(3, 60, 1, kinds=("stable_seasonal", "trending", "intermittent")))
    return path


def test_run_smoke(panel, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--input", str(panel), "--output", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == sorted(OUTPUT_FILES)
    for name, header in HEADERS.items():
        with open(out / name, encoding="utf-8") as fh:
            assert next(csv.reader(fh)) == header
    stats_header = next(csv.reader(open(out / "stats.csv")))
    assert stats_header == ["h", "KW_H", "KW_p", "p_RMSSE_h_vs_AHSIV", "p_RMSSE_h_vs_ERA", "p_AHSIV_vs_ERA"]

    metrics = read_rows(out / "metrics.csv")
    models = {(r["series_id"], r["model_id"]) for r in metrics}
    for r in read_rows(out / "selections.csv"):
        assert (r["series_id"], r["chosen_model"]) in models
        ranks = json.loads(r["rank_json"])
        assert ranks[r["chosen_model"]] == 1
    for r in read_rows(out / "report.csv"):
        if int(r["count"]):
            assert int(r["count"]) * float(r["mean"]) == pytest.approx(float(r["gra_global"]), abs=2e-6 * int(r["count"]))
        for key in ("mean", "gra_global"):
            if r[key]:
                assert len(r[key].split(".")[1]) == 6
    assert len(read_rows(out / "adjusted.csv")) == 3 * 5 * 12


def test_run_deterministic_and_parallel(panel, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "-i", str(panel), "-o", str(a), "--seed", "3"]) == 0
    assert main(["run", "-i", str(panel), "-o", str(b), "--seed", "3", "--workers", "2"]) == 0
    for name in OUTPUT_FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_run_config_file_and_override(panel, tmp_path, capsys):
    cfg = write(tmp_path / "run.yaml", f"input: {panel}\nsplit.H: 6\nselectors: RMSSE_h,ERA\n")
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--output", str(out), "-H", "4"]) == 0
    rows = read_rows(out / "report.csv")
    assert {r["selector"] for r in rows} == {"RMSSE_h", "ERA"}
    assert max(int(r["h"]) for r in rows) == 4


@pytest.mark.parametrize("argv,field", [
    (["--train-ratio", "2"], "split.train_ratio"),
    (["--forecasters", "Naive,Prophet"], "forecasters"),
    (["--selectors", "BEST"], "selectors"),
    (["--alpha-min", "0.9", "--alpha-max", "0.3"], "mdfh.alpha_min"),
])
def test_run_config_errors(panel, tmp_path, capsys, argv, field):
    code = main(["run", "-i", str(panel), "-o", str(tmp_path / "o"), *argv])
    assert code == 2
    summary = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert summary["error"] == "ConfigError" and summary["field"] == field
    assert not (tmp_path / "o").exists()


def test_run_unknown_config_key(tmp_path, capsys):
    cfg = write(tmp_path / "bad.yaml", "split.horizon: 3\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert json.loads(capsys.readouterr().err)["field"] == "split.horizon"


def test_run_bad_input(tmp_path, capsys):
    bad = write(tmp_path / "bad.csv", "series_id,period,value\ns1,0,-2\n")
    out = tmp_path / "o"
    assert main(["run", "-i", str(bad), "-o", str(out)]) == 1
    summary = json.loads(capsys.readouterr().err)
    assert summary["error"] == "NegativeValue"
    assert not out.exists() or not any(out.iterdir())


def test_build_config_defaults():
    cfg = build_config({})
    assert cfg.split.train_ratio == 0.91 and cfg.split.future_horizon == 12
    assert cfg.options.future_fit == "train_plus_test"
    with pytest.raises(ConfigError):
        build_config({"workers": 0})
    with pytest.raises(ConfigError):
        build_config({"era_body_variant": "maybe"})


# --------------------------------------------------------------- other commands


def test_select_reproduces_run(panel, tmp_path):
    out, sel = tmp_path / "out", tmp_path / "sel"
    assert main(["run", "-i", str(panel), "-o", str(out)]) == 0
    assert main(["select", "--adjusted", str(out / "adjusted.csv"),
                 "--metrics", str(out / "metrics.csv"), "-o", str(sel)]) == 0
    original = sorted(read_rows(out / "selections.csv"), key=lambda r: tuple(r.values()))
    rerun = sorted(read_rows(sel / "selections.csv"), key=lambda r: tuple(r.values()))
    assert [(r["series_id"], r["selector"], r["h"], r["chosen_model"]) for r in original] == \
           [(r["series_id"], r["selector"], r["h"], r["chosen_model"]) for r in rerun]


def test_stats_reproduces_run(panel, tmp_path):
    out, st = tmp_path / "out", tmp_path / "st"
    assert main(["run", "-i", str(panel), "-o", str(out)]) == 0
    assert main(["stats", "--gra", str(out / "gra.csv"), "-o", str(st)]) == 0
    assert (st / "stats.csv").read_bytes() == (out / "stats.csv").read_bytes()


def test_gen_roundtrip(tmp_path):
    path = tmp_path / "g" / "panel.csv"
    assert main(["gen", "-o", str(path), "--n-series", "4", "--length", "30", "--seed", "5"]) == 0
    corpus = ingest_csv(path, 12)
    assert corpus == mixed_corpus(4, 30, 5)
