import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from horizonsel.core import DemandSeries, SplitConfig
from horizonsel.errors import EmptyInput, FlatTrainingSeries, InvalidParams
from horizonsel.forecasters import DEFAULT_FORECASTERS, ForecasterSpec
from horizonsel.mdfh import Regime
from horizonsel.pipeline import (
    PipelineOptions,
    aggregate,
    describe,
    evaluate_corpus,
    evaluate_series,
)
from horizonsel.selectors import ALL_SELECTORS, Selector
from horizonsel.synthetic import generate_synthetic, mixed_corpus

CFG = SplitConfig(0.91, 12)


def test_constant_series_naive():
    e = evaluate_series(DemandSeries("c", (5.0,) * 60), CFG, [ForecasterSpec("Naive")])
    m = e.models["Naive"].metrics
    assert (m.mae, m.rmse, m.rmsse, m.mape, m.smape, m.bias) == (0.0,) * 6
    assert m.r2 is None
    assert set(e.gra.values()) == {1.0}
    assert len(e.gra) == 3 * 12


def test_flat_history_with_test_error_fails_series():
    # train is 27 fives; the test slice later steps up to 6, so RMSSE is undefined
    s = DemandSeries("f", (5.0,) * 50 + (6.0,) * 10)
    with pytest.raises(FlatTrainingSeries):
        evaluate_series(s, SplitConfig(0.5, 5), [ForecasterSpec("Naive"), ForecasterSpec("Drift")])


def test_failing_model_dropped_others_kept():
    s = DemandSeries("d", tuple(float(v) for v in range(1, 41)))
    e = evaluate_series(s, CFG, [ForecasterSpec("Naive"), ForecasterSpec("MovingAverage", window=60)])
    assert set(e.models) == {"Naive"}
    assert "MovingAverage[60]" in e.dropped
    assert all(r.chosen == "Naive" for r in e.selections.values())


def test_exact_seasonal_series():
    s = DemandSeries("q", tuple([1.0, 2.0, 3.0, 4.0] * 15), seasonal_period=4)
    e = evaluate_series(s, CFG)
    assert e.models["SeasonalNaive"].metrics.rmse == 0.0
    for (sel, h), res in e.selections.items():
        assert res.chosen == "SeasonalNaive", (sel, h)
        assert e.gra[(sel, h)] == 1.0


def test_zero_future_gives_missing_gra():
    rng = np.random.default_rng(3)
    values = tuple(float(v) for v in rng.integers(1, 10, 48)) + (0.0,) * 12
    e = evaluate_series(DemandSeries("z", values), CFG)
    assert len(e.gra) == 36 and all(v is None for v in e.gra.values())
    assert len(e.selections) == 36


def test_gra_present_iff_volume():
    values = tuple(float(v) for v in range(1, 49)) + (0.0, 0.0, 3.0) + (1.0,) * 9
    e = evaluate_series(DemandSeries("p", values), CFG)
    for (sel, h), g in e.gra.items():
        assert (g is None) == (h <= 2)


def test_adjusted_horizons_cover_1_to_H():
    e = evaluate_series(generate_synthetic("trending", 80, 1), SplitConfig(0.8, 7))
    for m in e.models.values():
        assert sorted(m.adjusted) == list(range(1, 8))
        assert len(m.trajectory) == 7
    assert e.horizon == 7


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["stable_seasonal", "intermittent", "trending", "explosive"]),
       st.integers(0, 10_000), st.integers(0, 10_000))
def test_no_leakage(kind, seed, seed2):
    s = generate_synthetic(kind, 60, seed)
    rng = np.random.default_rng(seed2)
    values = list(s.values)
    values[-12:] = rng.uniform(0, 500, 12).tolist()
    s2 = DemandSeries(s.id, tuple(values), s.seasonal_period)
    a, b = evaluate_series(s, CFG), evaluate_series(s2, CFG)
    assert a.structure == b.structure
    assert a.models.keys() == b.models.keys()
    for mid in a.models:
        ma, mb = a.models[mid], b.models[mid]
        assert ma.metrics == mb.metrics
        assert ma.adjusted == mb.adjusted
        assert ma.regime == mb.regime and ma.params == mb.params
        assert np.array_equal(ma.trajectory, mb.trajectory)
    assert a.selections == b.selections


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_stable_adjusted_rmsse_monotone(seed):
    e = evaluate_series(generate_synthetic("stable_seasonal", 100, seed), CFG)
    for m in e.models.values():
        seq = [m.adjusted[h].rmsse_h for h in range(1, 13)]
        if m.regime.kind is Regime.STABLE:
            assert all(x <= y for x, y in zip(seq, seq[1:]))
        else:
            assert len(set(seq)) == 1


def test_future_fit_modes():
    s = generate_synthetic("trending", 60, 5, noise=0.0)
    full = evaluate_series(s, CFG)
    train_only = evaluate_series(s, CFG, options=PipelineOptions(future_fit="train_only"))
    # a noiseless line is extrapolated exactly by Drift from either origin
    assert np.allclose(full.models["Drift"].trajectory, train_only.models["Drift"].trajectory)
    # Naive from the train-only origin repeats the last training value
    w = full.window
    assert np.all(train_only.models["Naive"].trajectory == w.train[-1])
    assert np.all(full.models["Naive"].trajectory == w.test[-1])


def test_diagnosis_source_history():
    s = generate_synthetic("explosive", 80, 2)
    opts = PipelineOptions(diagnosis_source="observed_history")
    e = evaluate_series(s, CFG, options=opts)
    kinds = {m.regime for m in e.models.values()}
    assert len(kinds) == 1  # every model is diagnosed on the same history


def test_selector_subset_and_variants():
    s = generate_synthetic("stable_seasonal", 80, 4)
    e = evaluate_series(s, CFG, options=PipelineOptions(selectors=("ERA",), era_body_variant=True))
    assert {sel for sel, _ in e.selections} == {Selector.ERA}
    with pytest.raises(InvalidParams):
        PipelineOptions(selectors=())
    with pytest.raises(InvalidParams):
        PipelineOptions(future_fit="later")
    with pytest.raises(EmptyInput):
        evaluate_series(s, CFG, forecasters=[])
    with pytest.raises(InvalidParams):
        evaluate_series(s, CFG, forecasters=[ForecasterSpec("Naive")] * 2)


# --------------------------------------------------------------- aggregation


def test_describe_two_values():
    d = describe([0.8, 0.6])
    assert d["count"] == 2
    assert d["mean"] == pytest.approx(0.7, abs=1e-12)
    assert d["total"] == pytest.approx(1.4, abs=1e-12)
    assert d["median"] == pytest.approx(0.7, abs=1e-12)
    # linear quartiles of {0.6, 0.8}: 0.65 and 0.75
    assert d["iqr"] == pytest.approx(0.1, abs=1e-12)
    assert d["mad"] == pytest.approx(0.1, abs=1e-12)
    assert d["std"] == pytest.approx(0.1, abs=1e-12)
    assert d["robust_cv"] == pytest.approx(0.1 / 0.7, abs=1e-12)


def test_describe_empty():
    d = describe([])
    assert d["count"] == 0 and d["mean"] is None and d["total"] == 0.0


def test_aggregate_single_perfect_series():
    e = evaluate_series(DemandSeries("c", (5.0,) * 60), CFG, [ForecasterSpec("Naive")])
    rep = aggregate([e])
    for r in rep.rows:
        assert (r.count, r.mean, r.median, r.min, r.max, r.gra_global) == (1, 1.0, 1.0, 1.0, 1.0, 1.0)
        assert (r.std, r.iqr, r.mad) == (0.0, 0.0, 0.0)
    with pytest.raises(EmptyInput):
        aggregate([])


@pytest.fixture(scope="module")
def corpus_evals():
    evals, failures = evaluate_corpus(mixed_corpus(40, 96, 11), CFG)
    return evals


def test_aggregate_identities(corpus_evals):
    rep = aggregate(corpus_evals)
    assert rep.horizon == 12 and rep.selectors == ALL_SELECTORS
    for h in range(1, 13):
        ranks = sorted(rep.row(sel, h).final_ranking for sel in ALL_SELECTORS)
        assert ranks == [1, 2, 3]
        for sel in ALL_SELECTORS:
            r = rep.row(sel, h)
            if r.count:
                assert r.gra_global == pytest.approx(r.count * r.mean, rel=1e-9)
            n_valid = sum(1 for e in corpus_evals if (sel, h) in e.selections)
            freq = sum(c for (s, hh, _), c in rep.frequency.items() if s is sel and hh == h)
            assert freq == n_valid


def test_aggregate_order_independent(corpus_evals):
    shuffled = list(corpus_evals)
    random.Random(0).shuffle(shuffled)
    assert aggregate(shuffled) == aggregate(corpus_evals)


def test_aggregate_rejects_mixed_horizons(corpus_evals):
    other = evaluate_series(generate_synthetic("trending", 60, 0, series_id="zz"), SplitConfig(0.9, 6))
    with pytest.raises(InvalidParams):
        aggregate(list(corpus_evals) + [other])


def test_corpus_parallel_matches_serial():
    corpus = mixed_corpus(12, 60, 2)
    serial = evaluate_corpus(corpus, CFG)
    parallel = evaluate_corpus(list(reversed(corpus)), CFG, workers=2)
    assert [e.series_id for e in serial[0]] == [e.series_id for e in parallel[0]]
    assert aggregate(serial[0]) == aggregate(parallel[0])
    assert serial[1] == parallel[1]


def test_corpus_reports_failures():
    corpus = [DemandSeries("short", (1.0,) * 10), generate_synthetic("trending", 60, 0, series_id="ok")]
    evals, failures = evaluate_corpus(corpus, CFG)
    assert [e.series_id for e in evals] == ["ok"]
    assert failures[0][0] == "short" and "SeriesTooShort" in failures[0][1]
    with pytest.raises(InvalidParams):
        evaluate_corpus([corpus[1], corpus[1]], CFG)
