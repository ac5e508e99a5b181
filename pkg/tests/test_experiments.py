import csv
import json
import math
import statistics
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from everlasting_sim.experiments import (
    ARM_AMM,
    ARM_DPMM,
    ConfigError,
    Experiment,
    ExperimentConfig,
    ReplayMode,
    compute_statistics,
    histogram,
    replay_path,
    run_amm_vs_dpmm,
    run_experiment,
    run_funding_grid,
    run_pnl_histogram,
    run_real_data_replay,
    run_slippage_experiment,
)
from everlasting_sim.lp import FlowModel
from everlasting_sim.paths import PricePath, PriceCsvError


def small(**kw):
    return ExperimentConfig(**{"seeds": 4, "horizon_days": 30, **kw})


def read_csv(path):
    lines = path.read_text().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    rows = list(csv.reader(ln for ln in lines if not ln.startswith("#")))
    return comments, rows[0], rows[1:]


def test_statistics_constant():
    s = compute_statistics([1.0, 1.0, 1.0])
    assert (s.mean_pnl, s.pnl_volatility, s.sharpe, s.win_rate) == (1.0, 0.0, 0.0, 1.0)
    assert s.profit_factor == math.inf


def test_statistics_two_values():
    s = compute_statistics([2.0, -1.0])
    assert s.mean_pnl == 0.5 and s.win_rate == 0.5 and s.profit_factor == 2.0


def test_statistics_all_zero_profit_factor():
    assert compute_statistics([0.0, 0.0]).profit_factor == 0.0


def test_statistics_empty_raises():
    with pytest.raises(ValueError):
        compute_statistics([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=100))
@settings(max_examples=100, deadline=None)
def test_statistics_against_plain_python(xs):
    s = compute_statistics(xs)
    n = len(xs)
    mean = math.fsum(xs) / n
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / n)
    assert s.mean_pnl == pytest.approx(mean, rel=1e-9, abs=1e-6)
    assert s.median_pnl == statistics.median(xs)
    assert s.pnl_volatility == pytest.approx(std, rel=1e-9, abs=1e-6)
    assert s.win_rate == sum(x > 0 for x in xs) / n
    gains = math.fsum(x for x in xs if x > 0)
    losses = -math.fsum(x for x in xs if x < 0)
    if losses > 0:
        assert s.profit_factor == pytest.approx(gains / losses, rel=1e-9)
    assert 0 <= s.win_rate <= 1 and s.profit_factor >= 0
    assert sum(s.histogram.counts) == n
    assert 10 <= len(s.histogram.counts) <= 1000


def test_histogram_single_value():
    h = histogram([3.0])
    assert sum(h.counts) == 1 and len(h.counts) == 10


def test_config_roundtrip_and_validation():
    cfg = ExperimentConfig.from_dict({"experiment": "pnl_histogram", "seeds": 7, "market": {"sigma": 0.5},
                                      "flow": {"momentum_beta": 2.0}})
    assert cfg.market.sigma == 0.5 and cfg.flow.momentum_beta == 2.0
    assert ExperimentConfig.from_json(json.dumps(cfg.to_dict())) == cfg
    for bad in [{"bogus": 1}, {"seeds": 0}, {"market": {"s0": -1}}, {"flow": {"nope": 1}},
                {"experiment": "nope"}, {"strikes": []}, {"hedge_ratio": 2.0}, {"market": 3}]:
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("{not json")


def test_slippage_table():
    t = run_slippage_experiment(ExperimentConfig(slippage_points=21))
    assert t.trade_sizes.size == 21
    zero = t.trade_sizes == 0
    assert zero.sum() == 1
    assert t.everlasting[zero][0] == 0.0 and np.all(t.fixed[zero] == 0.0)
    nz = ~zero
    for j in range(t.fixed.shape[1]):
        np.testing.assert_allclose(t.fixed[nz, j], 36.0 * t.everlasting[nz], rtol=4 * np.finfo(float).eps, atol=0)


def test_funding_grid_shape_and_degenerate():
    g = run_funding_grid(small(liquidity_levels=[10000.0], strikes=[3200.0]))
    assert list(g.cells) == [(10000.0, 3200.0)]
    cell = g.cells[10000.0, 3200.0]
    assert cell.mean_series.shape == (30,)
    assert len(cell.runs) == 4


def test_pnl_histogram_single_seed():
    levels = run_pnl_histogram(small(seeds=1))
    for lv in levels.values():
        s = lv.statistics
        assert sum(s.histogram.counts) == 1
        assert s.mean_pnl == s.median_pnl == lv.runs[0].final_pnl


def test_arms_are_paired_and_order_free():
    cfg = small()
    a = run_amm_vs_dpmm(cfg, arms=(ARM_DPMM, ARM_AMM))
    b = run_amm_vs_dpmm(cfg, arms=(ARM_AMM, ARM_DPMM))
    assert a[ARM_DPMM].statistics == b[ARM_DPMM].statistics
    assert a[ARM_AMM].statistics == b[ARM_AMM].statistics
    for ra, rb in zip(a[ARM_DPMM].runs, a[ARM_AMM].runs):
        assert [e.price for e in ra.ledger] == [e.price for e in rb.ledger]


def test_identical_arms_identical_statistics():
    cfg = small()
    x = run_amm_vs_dpmm(cfg, arms=(ARM_DPMM,))[ARM_DPMM].statistics
    y = run_amm_vs_dpmm(cfg, arms=(ARM_DPMM,))[ARM_DPMM].statistics
    assert x == y


def test_parallel_equals_serial():
    serial = run_pnl_histogram(small(workers=1))
    parallel = run_pnl_histogram(small(workers=2))
    for q in serial:
        assert serial[q].runs == parallel[q].runs


def write_prices(tmp_path, prices, name="prices.csv"):
    p = tmp_path / name
    rows = [f"{date(2024, 1, 1) + timedelta(days=i)},{float(x)!r}" for i, x in enumerate(prices)]
    p.write_text("date,close\n" + "\n".join(rows) + "\n")
    return p


def test_replay_constant_prices_single_contract(tmp_path):
    csv_path = write_prices(tmp_path, [3000.0] * 20)
    cfg = ExperimentConfig(replay_mode=ReplayMode.SINGLE_CONTRACT)
    res = run_real_data_replay(csv_path, 3200.0, cfg)
    assert len(res.ledger) == 19
    assert all(e.hedge_pnl == 0.0 for e in res.ledger)
    assert res == run_real_data_replay(csv_path, 3200.0, cfg)


def test_replay_rising_path_delta_limit():
    prices = 3000.0 * np.exp(np.linspace(0, 2.0, 31))
    cfg = ExperimentConfig(replay_mode=ReplayMode.SINGLE_CONTRACT, replay_contracts=5.0, q0=100000.0)
    res = replay_path(PricePath(prices, ("synthetic",)), 1000.0, cfg)
    # deep in the money: hedge of the 5 contracts approaches -5 underlying units
    assert res.ledger[-1].hedge_position == pytest.approx(-5.0, abs=1e-3)


def test_replay_dpmm_mode_deterministic(tmp_path):
    prices = 3000.0 * np.exp(np.cumsum(np.r_[0, np.random.default_rng(0).normal(0, 0.03, 40)]))
    csv_path = write_prices(tmp_path, prices)
    cfg = ExperimentConfig(replay_mode="dpmm")
    assert run_real_data_replay(csv_path, 3200.0, cfg) == run_real_data_replay(csv_path, 3200.0, cfg)


def test_replay_bad_csv_propagates(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("date,close\n2024-01-01,1\n2024-01-01,2\n")
    with pytest.raises(PriceCsvError):
        run_real_data_replay(p, 3200.0, ExperimentConfig())


def test_output_files_and_full_precision(tmp_path):
    cfg = small(experiment=Experiment.ALL, liquidity_levels=[1000.0, 10000.0], strikes=[3100.0, 3200.0])
    written = run_experiment(cfg, tmp_path)
    names = {p.name for p in written}
    assert {"slippage.csv", "funding_runs.csv", "funding_series.csv", "funding_summary.csv",
            "pnl_runs.csv", "pnl_histogram.csv", "pnl_statistics.json", "amm_vs_dpmm_runs.csv",
            "amm_vs_dpmm_statistics.json"} <= names
    for p in written:
        if p.suffix == ".csv":
            comments, header, rows = read_csv(p)
            assert any(c.startswith("# config: ") for c in comments)
            assert any("everlasting_sim 0.1.0" in c for c in comments)
            assert all(len(r) == len(header) for r in rows)

    # statistics are recomputable from the per-run CSV
    _, header, rows = read_csv(tmp_path / "pnl_runs.csv")
    stats = json.loads((tmp_path / "pnl_statistics.json").read_text())["levels"]
    for q in ("1000.0", "10000.0"):
        pnl = [float(r[2]) for r in rows if r[0] == q]
        assert compute_statistics(pnl).to_dict()["mean_pnl"] == stats[q]["mean_pnl"]
        assert compute_statistics(pnl).to_dict()["pnl_volatility"] == stats[q]["pnl_volatility"]


def test_flow_config_recorded_in_header(tmp_path):
    cfg = small(experiment=Experiment.SLIPPAGE, flow=FlowModel(momentum_beta=1.25))
    (p,) = run_experiment(cfg, tmp_path)
    comments, _, _ = read_csv(p)
    config_line = next(c for c in comments if c.startswith("# config: "))
    assert json.loads(config_line[len("# config: "):])["flow"]["momentum_beta"] == 1.25


def test_replay_experiment_requires_csv(tmp_path):
    with pytest.raises(ConfigError):
        run_experiment(small(experiment=Experiment.REAL_DATA_REPLAY), tmp_path)
