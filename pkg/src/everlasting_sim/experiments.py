"""Seed-batch experiments, cross-run statistics and result files.

Run ``i`` of an experiment with master seed ``m`` draws everything from
``RngSeed(m, i)``, so comparative arms see identical paths, flow shocks
and cost shocks. Runs fan out over a process pool and are reduced in seed
order, which keeps every output file byte-identical whatever the worker
count.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .costs import CostConfig
from .lp import NO_FLOW, FlowModel, RunContext, RunResult, StrategyConfig, run_simulation
from .market import FragmentedPools, PoolConfig, PricingMode, default_inventory_cap, slippage_curve
from .paths import MarketParams, PricePath, RngSeed, generate_path, ingest_price_csv
from .pricing import OptionSpec, bs_call, everlasting_call_price

MIN_HISTOGRAM_BINS = 10
MAX_HISTOGRAM_BINS = 1000
EXECUTION_ONLY_FIELDS = ("workers", "output_path")

STATISTIC_DEFINITIONS = (
    "sharpe = mean / population std of final PnL across runs (0 when std is 0, no annualization); "
    "win_rate = fraction of runs with final PnL > 0; "
    "profit_factor = sum of gains / |sum of losses| (inf when there are no losses); "
    "histogram = Freedman-Diaconis bins on normalized final PnL, clipped to [10, 1000]"
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class Experiment(str, enum.Enum):
    SLIPPAGE = "slippage"
    FUNDING_GRID = "funding_grid"
    PNL_HISTOGRAM = "pnl_histogram"
    AMM_VS_DPMM = "amm_vs_dpmm"
    REAL_DATA_REPLAY = "real_data_replay"
    ALL = "all"


class ReplayMode(str, enum.Enum):
    DPMM = "dpmm"
    SINGLE_CONTRACT = "single_contract"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an experiment needs; JSON configs use these field names.

    ``flow`` drives the LP experiments. ``funding_flow`` drives the funding
    grid and defaults to pure momentum plus noise, without the traders'
    reaction to the pool's quote.
    """

    experiment: Experiment = Experiment.ALL
    seed: int = 0
    seeds: int = 100
    horizon_days: int = 180
    market: MarketParams = field(default_factory=MarketParams)
    liquidity_levels: tuple[float, ...] = (1000.0, 10000.0, 100000.0)
    strikes: tuple[float, ...] = (3100.0, 3200.0, 3300.0)
    q0: float = 10000.0
    strike: float = 3200.0
    decay_factor: int = 1
    basket_size: int = 365
    normalize_basket: bool = True
    k_shape: float = 70.0
    signed_adjustment: bool = True
    inventory_cap_fraction: float = 0.5
    hedge_ratio: float = 1.0
    rebalance_threshold: float = 0.0
    literal_funding: bool = False
    flow: FlowModel = field(default_factory=FlowModel)
    funding_flow: FlowModel = field(default_factory=lambda: FlowModel(price_elasticity=0.0))
    costs: CostConfig = field(default_factory=CostConfig)
    slippage_points: int = 21
    slippage_signed: bool = False
    fixed_expiry_months: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    replay_csv: str | None = None
    replay_mode: ReplayMode = ReplayMode.DPMM
    replay_contracts: float = 1.0
    workers: int = 1
    output_path: str | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "experiment", Experiment(self.experiment))
            object.__setattr__(self, "replay_mode", ReplayMode(self.replay_mode))
        except ValueError as e:
            raise ConfigError(str(e)) from None
        for name in ("liquidity_levels", "strikes", "fixed_expiry_months"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if self.horizon_days < 1:
            raise ConfigError("horizon_days must be >= 1")
        if not self.liquidity_levels or not self.strikes:
            raise ConfigError("liquidity_levels and strikes must be non-empty")
        if any(not q > 0 for q in self.liquidity_levels + (self.q0,)):
            raise ConfigError("liquidity levels must be positive")
        if any(not k > 0 for k in self.strikes + (self.strike,)):
            raise ConfigError("strikes must be positive")
        if not 0 < self.inventory_cap_fraction:
            raise ConfigError("inventory_cap_fraction must be positive")
        if self.slippage_points < 1:
            raise ConfigError("slippage_points must be >= 1")
        if not self.fixed_expiry_months or any(m < 1 for m in self.fixed_expiry_months):
            raise ConfigError("fixed_expiry_months must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.option_spec(self.strike)
            self.strategy()
        except ValueError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        """Build from parsed JSON; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        nested = {"market": MarketParams, "flow": FlowModel, "funding_flow": FlowModel, "costs": CostConfig}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        try:
            for key, value in data.items():
                if key in nested:
                    sub = nested[key]
                    if not isinstance(value, dict):
                        raise ConfigError(f"{key} must be an object")
                    bad = sorted(set(value) - {f.name for f in dataclasses.fields(sub)})
                    if bad:
                        raise ConfigError(f"unknown keys in {key}: {', '.join(bad)}")
                    value = sub(**value)
                kwargs[key] = value
            return cls(**kwargs)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e}") from None
        return cls.from_dict(data)

    def to_dict(self, *, outputs_only: bool = False) -> dict[str, Any]:
        """Plain-JSON view. ``outputs_only`` drops fields that cannot change results."""
        def plain(x):
            if isinstance(x, enum.Enum):
                return x.value
            if isinstance(x, dict):
                return {k: plain(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [plain(v) for v in x]
            return x
        d = plain(dataclasses.asdict(self))
        if outputs_only:
            for key in EXECUTION_ONLY_FIELDS:
                d.pop(key)
        return d

    def option_spec(self, strike: float) -> OptionSpec:
        return OptionSpec(strike, self.decay_factor, self.basket_size, normalize=self.normalize_basket)

    def strategy(self, **overrides) -> StrategyConfig:
        base = dict(hedge_ratio=self.hedge_ratio, rebalance_threshold=self.rebalance_threshold,
                    flow=self.flow, literal_funding=self.literal_funding)
        return StrategyConfig(**{**base, **overrides})


# --- statistics -------------------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class RunStatistics:
    n: int
    mean_pnl: float
    median_pnl: float
    pnl_volatility: float
    sharpe: float
    win_rate: float
    profit_factor: float
    histogram: Histogram

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["histogram"] = {"edges": list(self.histogram.edges), "counts": list(self.histogram.counts)}
        return d


def histogram(values: Sequence[float], min_bins: int = MIN_HISTOGRAM_BINS,
              max_bins: int = MAX_HISTOGRAM_BINS) -> Histogram:
    """Freedman-Diaconis bin count clipped to ``[min_bins, max_bins]``.

    The upper clip stops a single far outlier from asking for an
    astronomically fine grid.
    """
    x = np.asarray(values, dtype=float)
    q75, q25 = np.percentile(x, [75, 25])
    width = 2.0 * (q75 - q25) / np.cbrt(x.size)
    span = float(np.ptp(x))
    n_bins = int(np.ceil(span / width)) if width > 0 and span > 0 else min_bins
    n_bins = min(max(n_bins, min_bins), max_bins)
    counts, edges = np.histogram(x, bins=n_bins)
    return Histogram(tuple(float(e) for e in edges), tuple(int(c) for c in counts))


def compute_statistics(final_pnls: Sequence[float], normalized: Sequence[float] | None = None) -> RunStatistics:
    """Cross-run statistics; the histogram is built on ``normalized`` if given."""
    x = np.asarray(final_pnls, dtype=float)
    if x.size == 0:
        raise ValueError("compute_statistics needs at least one value")
    if not np.all(np.isfinite(x)):
        raise ValueError("final PnLs must be finite")
    mean = float(np.mean(x))
    std = float(np.std(x))
    gains = float(x[x > 0].sum())
    losses = float(-x[x < 0].sum())
    if losses > 0:
        pf = gains / losses
    else:
        pf = math.inf if gains > 0 else 0.0
    return RunStatistics(
        n=int(x.size),
        mean_pnl=mean,
        median_pnl=float(np.median(x)),
        pnl_volatility=std,
        sharpe=mean / std if std > 0 else 0.0,
        win_rate=float(np.mean(x > 0)),
        profit_factor=pf,
        histogram=histogram(x if normalized is None else normalized),
    )


# --- run fan-out --------------------------------------------------------------

@dataclass(frozen=True)
class RunJob:
    """One simulated path plus the LP setup to run on it."""

    master_seed: int
    index: int
    horizon_days: int
    market: MarketParams
    spec: OptionSpec
    q0: float
    k_shape: float
    cap_fraction: float
    pricing_mode: PricingMode
    signed_adjustment: bool
    costs: CostConfig
    strategy: StrategyConfig


def build_context(job_like, s_ref: float) -> RunContext:
    """Pool sized so the cap is ``cap_fraction * Q0`` of option value at ``s_ref``."""
    i0 = everlasting_call_price(s_ref, job_like.spec, job_like.market)
    cap = default_inventory_cap(job_like.q0, i0, job_like.cap_fraction)
    pool = PoolConfig(job_like.q0, job_like.k_shape, cap, job_like.pricing_mode, job_like.signed_adjustment)
    return RunContext(job_like.spec, job_like.market, pool, job_like.costs, job_like.strategy)


def execute_job(job: RunJob) -> RunResult:
    seed = RngSeed(job.master_seed, job.index)
    path = generate_path(job.market, job.horizon_days, seed)
    return run_simulation(path, build_context(job, job.market.s0), seed)


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """``list(map(fn, items))``, optionally across processes, in input order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _jobs(cfg: ExperimentConfig, *, q0: float, strike: float, strategy: StrategyConfig,
          pricing_mode: PricingMode = PricingMode.DPMM) -> list[RunJob]:
    spec = cfg.option_spec(strike)
    return [RunJob(cfg.seed, i, cfg.horizon_days, cfg.market, spec, q0, cfg.k_shape, cfg.inventory_cap_fraction,
                   pricing_mode, cfg.signed_adjustment, cfg.costs, strategy) for i in range(cfg.seeds)]


def _run_arms(cfg: ExperimentConfig, arms: dict[Any, list[RunJob]]) -> dict[Any, list[RunResult]]:
    keys = list(arms)
    flat = [job for k in keys for job in arms[k]]
    results = parallel_map(execute_job, flat, cfg.workers)
    out, pos = {}, 0
    for k in keys:
        out[k] = results[pos:pos + len(arms[k])]
        pos += len(arms[k])
    return out


# --- experiments --------------------------------------------------------------

@dataclass(frozen=True)
class SlippageTable:
    months: tuple[int, ...]
    trade_sizes: np.ndarray
    everlasting: np.ndarray
    fixed: np.ndarray  # shape (points, months)
    inventory_cap: float


def run_slippage_experiment(cfg: ExperimentConfig) -> SlippageTable:
    """One pool holding ``Q0`` against ``m`` fixed-expiry pools of ``Q0/m``.

    The symmetric trade grid spans the per-pool inventory cap so every
    trade is admissible in every pool.
    """
    spec = cfg.option_spec(cfg.strike)
    i0 = everlasting_call_price(cfg.market.s0, spec, cfg.market)
    cap = default_inventory_cap(cfg.q0, i0, cfg.inventory_cap_fraction)
    unified = PoolConfig(cfg.q0, cfg.k_shape, cap, PricingMode.DPMM, cfg.slippage_signed)
    pools = FragmentedPools.split(unified, cfg.fixed_expiry_months)
    q_max = pools.pools[0].config.inventory_cap
    sizes = np.linspace(-q_max, q_max, cfg.slippage_points) if cfg.slippage_points > 1 else np.zeros(1)

    eo = np.array([p.slippage for p in slippage_curve(i0, unified, 0.0, sizes)])
    fixed = np.empty((sizes.size, len(pools.pools)))
    for j, pool in enumerate(pools.pools):
        i_fixed = bs_call(cfg.market.s0, cfg.strike, cfg.market.r, cfg.market.sigma, pool.maturity)
        fixed[:, j] = [p.slippage for p in slippage_curve(i_fixed, pool.config, 0.0, sizes)]
    return SlippageTable(tuple(cfg.fixed_expiry_months), sizes, eo, fixed, cap)


@dataclass(frozen=True)
class FundingCell:
    q0: float
    strike: float
    runs: tuple[RunResult, ...]

    @property
    def mean_fee_per_run(self) -> np.ndarray:
        return np.array([r.column("funding_fee").mean() for r in self.runs])

    @property
    def mean_abs_fee_per_run(self) -> np.ndarray:
        return np.array([np.abs(r.column("funding_fee")).mean() for r in self.runs])

    @property
    def mean_series(self) -> np.ndarray:
        return np.mean([r.column("funding_fee") for r in self.runs], axis=0)

    @property
    def mean_fee(self) -> float:
        return float(self.mean_fee_per_run.mean())

    @property
    def mean_abs_fee(self) -> float:
        return float(self.mean_abs_fee_per_run.mean())


@dataclass(frozen=True)
class FundingGrid:
    cells: dict[tuple[float, float], FundingCell]
    liquidity_levels: tuple[float, ...]
    strikes: tuple[float, ...]

    def abs_fee_decreasing_in_q0(self) -> dict[float, bool]:
        qs = sorted(self.liquidity_levels)
        return {k: all(self.cells[a, k].mean_abs_fee > self.cells[b, k].mean_abs_fee for a, b in zip(qs, qs[1:]))
                for k in self.strikes}

    def fee_increasing_in_strike(self) -> dict[float, bool]:
        ks = sorted(self.strikes)
        return {q: all(self.cells[q, a].mean_fee < self.cells[q, b].mean_fee for a, b in zip(ks, ks[1:]))
                for q in self.liquidity_levels}


def run_funding_grid(cfg: ExperimentConfig) -> FundingGrid:
    """Daily funding fees for every ``(Q0, K)`` pair on the same seed set."""
    strategy = cfg.strategy(flow=cfg.funding_flow)
    arms = {(q, k): _jobs(cfg, q0=q, strike=k, strategy=strategy)
            for q in cfg.liquidity_levels for k in cfg.strikes}
    results = _run_arms(cfg, arms)
    cells = {key: FundingCell(key[0], key[1], tuple(runs)) for key, runs in results.items()}
    return FundingGrid(cells, cfg.liquidity_levels, cfg.strikes)


@dataclass(frozen=True)
class PnlLevel:
    q0: float
    runs: tuple[RunResult, ...]
    statistics: RunStatistics

    @property
    def final_pnls(self) -> np.ndarray:
        return np.array([r.final_pnl for r in self.runs])

    @property
    def normalized(self) -> np.ndarray:
        return np.array([r.final_pnl_normalized for r in self.runs])


def run_pnl_histogram(cfg: ExperimentConfig) -> dict[float, PnlLevel]:
    """Final-PnL distribution of the hedged DPMM pool at each liquidity level."""
    arms = {q: _jobs(cfg, q0=q, strike=cfg.strike, strategy=cfg.strategy()) for q in cfg.liquidity_levels}
    out = {}
    for q, runs in _run_arms(cfg, arms).items():
        pnl = [r.final_pnl for r in runs]
        norm = [r.final_pnl_normalized for r in runs]
        out[q] = PnlLevel(q, tuple(runs), compute_statistics(pnl, norm))
    return out


ARM_DPMM = "dpmm"
ARM_AMM = "amm"
ARM_DPMM_UNHEDGED = "dpmm_unhedged"


@dataclass(frozen=True)
class ArmResult:
    name: str
    runs: tuple[RunResult, ...]
    statistics: RunStatistics

    @property
    def final_pnls(self) -> np.ndarray:
        return np.array([r.final_pnl for r in self.runs])


def run_amm_vs_dpmm(cfg: ExperimentConfig, arms: Iterable[str] = (ARM_DPMM, ARM_AMM, ARM_DPMM_UNHEDGED)
                    ) -> dict[str, ArmResult]:
    """Paired arms on identical seeds.

    ``dpmm``: inventory-sensitive quotes with the configured hedge ratio.
    ``amm``: flat quotes at theoretical value, hedging off.
    ``dpmm_unhedged``: inventory-sensitive quotes, hedging off.
    """
    setups = {
        ARM_DPMM: (PricingMode.DPMM, cfg.strategy()),
        ARM_AMM: (PricingMode.STATIC_AMM, cfg.strategy(hedge_ratio=0.0)),
        ARM_DPMM_UNHEDGED: (PricingMode.DPMM, cfg.strategy(hedge_ratio=0.0)),
    }
    names = list(arms)
    unknown = [a for a in names if a not in setups]
    if unknown:
        raise ConfigError(f"unknown arms: {unknown}")
    jobs = {a: _jobs(cfg, q0=cfg.q0, strike=cfg.strike, strategy=setups[a][1], pricing_mode=setups[a][0])
            for a in names}
    out = {}
    for a, runs in _run_arms(cfg, jobs).items():
        out[a] = ArmResult(a, tuple(runs), compute_statistics([r.final_pnl for r in runs],
                                                              [r.final_pnl_normalized for r in runs]))
    return out


def run_real_data_replay(csv_path: str | os.PathLike, strike: float, cfg: ExperimentConfig) -> RunResult:
    """Single deterministic run on an ingested close series.

    ``dpmm`` mode runs the full loop with seeded trader flow; in
    ``single_contract`` mode the pool starts short ``replay_contracts``
    calls, sees no flow and only delta-hedges.
    """
    with open(csv_path, "rb") as fh:
        path = ingest_price_csv(fh, source_id=str(csv_path))
    return replay_path(path, strike, cfg)


def replay_path(path: PricePath, strike: float, cfg: ExperimentConfig) -> RunResult:
    if cfg.replay_mode is ReplayMode.SINGLE_CONTRACT:
        strategy = cfg.strategy(flow=NO_FLOW, initial_inventory=cfg.replay_contracts)
    else:
        strategy = cfg.strategy()
    market = dataclasses.replace(cfg.market, s0=float(path.prices[0]))
    job = RunJob(cfg.seed, 0, path.horizon_days, market, cfg.option_spec(strike), cfg.q0, cfg.k_shape,
                 cfg.inventory_cap_fraction, PricingMode.DPMM, cfg.signed_adjustment, cfg.costs, strategy)
    return run_simulation(path, build_context(job, market.s0), RngSeed(cfg.seed, 0))


# --- output -------------------------------------------------------------------

def fmt(x) -> str:
    """Full-precision, round-trippable decimal text."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _json_safe(x):
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def header_block(cfg: ExperimentConfig, experiment: str) -> str:
    lines = [
        f"everlasting_sim {__version__}",
        f"experiment: {experiment}",
        f"master_seed: {cfg.seed}",
        f"config: {json.dumps(_json_safe(cfg.to_dict(outputs_only=True)), sort_keys=True)}",
        f"statistics: {STATISTIC_DEFINITIONS}",
    ]
    return "".join(f"# {line}\n" for line in lines)


def write_csv(path: Path, cfg: ExperimentConfig, experiment: str, columns: Sequence[str],
              rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    buf.write(header_block(cfg, experiment))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def write_json(path: Path, cfg: ExperimentConfig, experiment: str, payload: dict) -> Path:
    doc = {"code_version": __version__, "experiment": experiment, "master_seed": cfg.seed,
           "config": cfg.to_dict(outputs_only=True), "statistic_definitions": STATISTIC_DEFINITIONS, **payload}
    path.write_text(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _ledger_rows(result: RunResult, prefix: Sequence = ()) -> Iterable[list]:
    for e in result.ledger:
        yield [*prefix, *(getattr(e, f) for f in e.FIELDS)]


def write_slippage(out: Path, cfg: ExperimentConfig, t: SlippageTable) -> list[Path]:
    cols = ["trade_size", "everlasting_slippage", *(f"fixed_m{m}_slippage" for m in t.months)]
    rows = ([q, e, *f] for q, e, f in zip(t.trade_sizes, t.everlasting, t.fixed))
    return [write_csv(out / "slippage.csv", cfg, Experiment.SLIPPAGE.value, cols, rows)]


def write_funding_grid(out: Path, cfg: ExperimentConfig, g: FundingGrid) -> list[Path]:
    name = Experiment.FUNDING_GRID.value
    keys = [(q, k) for q in g.liquidity_levels for k in g.strikes]
    runs = ([q, k, i, mf, maf, r.final_pnl]
            for q, k in keys
            for i, (r, mf, maf) in enumerate(zip(g.cells[q, k].runs, g.cells[q, k].mean_fee_per_run,
                                                 g.cells[q, k].mean_abs_fee_per_run)))
    p1 = write_csv(out / "funding_runs.csv", cfg, name,
                   ["q0", "strike", "run", "mean_fee", "mean_abs_fee", "final_pnl"], runs)
    series = np.column_stack([g.cells[key].mean_series for key in keys])
    cols = ["day", *(f"fee_q{fmt(q)}_k{fmt(k)}" for q, k in keys)]
    p2 = write_csv(out / "funding_series.csv", cfg, name, cols,
                   ([d, *row] for d, row in enumerate(series, start=1)))
    summary = ([q, k, g.cells[q, k].mean_fee, g.cells[q, k].mean_abs_fee] for q, k in keys)
    p3 = write_csv(out / "funding_summary.csv", cfg, name, ["q0", "strike", "mean_fee", "mean_abs_fee"], summary)
    p4 = write_json(out / "funding_orderings.json", cfg, name, {
        "abs_fee_decreasing_in_q0": {fmt(k): v for k, v in g.abs_fee_decreasing_in_q0().items()},
        "fee_increasing_in_strike": {fmt(q): v for q, v in g.fee_increasing_in_strike().items()},
    })
    return [p1, p2, p3, p4]


def write_pnl_histogram(out: Path, cfg: ExperimentConfig, levels: dict[float, PnlLevel]) -> list[Path]:
    name = Experiment.PNL_HISTOGRAM.value
    runs = ([q, i, r.final_pnl, r.final_pnl_normalized] for q, lv in levels.items() for i, r in enumerate(lv.runs))
    p1 = write_csv(out / "pnl_runs.csv", cfg, name, ["q0", "run", "final_pnl", "final_pnl_normalized"], runs)
    bins = ([q, lo, hi, c] for q, lv in levels.items()
            for lo, hi, c in zip(lv.statistics.histogram.edges, lv.statistics.histogram.edges[1:],
                                 lv.statistics.histogram.counts))
    p2 = write_csv(out / "pnl_histogram.csv", cfg, name, ["q0", "bin_left", "bin_right", "count"], bins)
    stats = {fmt(q): {**lv.statistics.to_dict(),
                      "mean_pnl_normalized": float(lv.normalized.mean()),
                      "median_pnl_normalized": float(np.median(lv.normalized))}
             for q, lv in levels.items()}
    p3 = write_json(out / "pnl_statistics.json", cfg, name, {"levels": stats})
    return [p1, p2, p3]


def write_amm_vs_dpmm(out: Path, cfg: ExperimentConfig, arms: dict[str, ArmResult]) -> list[Path]:
    name = Experiment.AMM_VS_DPMM.value
    names = list(arms)
    rows = ([i, *(arms[a].runs[i].final_pnl for a in names)] for i in range(cfg.seeds))
    p1 = write_csv(out / "amm_vs_dpmm_runs.csv", cfg, name, ["run", *(f"{a}_final_pnl" for a in names)], rows)
    p2 = write_json(out / "amm_vs_dpmm_statistics.json", cfg, name,
                    {"arms": {a: arms[a].statistics.to_dict() for a in names}})
    return [p1, p2]


def write_replay(out: Path, cfg: ExperimentConfig, result: RunResult) -> list[Path]:
    name = Experiment.REAL_DATA_REPLAY.value
    p1 = write_csv(out / "replay_ledger.csv", cfg, name, list(result.ledger[0].FIELDS), _ledger_rows(result))
    last = result.ledger[-1]
    p2 = write_json(out / "replay_summary.json", cfg, name, {
        "days": len(result.ledger),
        "final_pnl": result.final_pnl,
        "final_pnl_normalized": result.final_pnl_normalized,
        "final_inventory": last.inventory,
        "final_hedge_position": last.hedge_position,
        "total_funding": float(sum(e.funding for e in result.ledger)),
        "total_hedge_pnl": float(sum(e.hedge_pnl for e in result.ledger)),
        "total_tx_cost": float(sum(e.tx_cost for e in result.ledger)),
    })
    return [p1, p2]


SUITE = (Experiment.SLIPPAGE, Experiment.FUNDING_GRID, Experiment.PNL_HISTOGRAM, Experiment.AMM_VS_DPMM)


def run_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike) -> list[Path]:
    """Run ``cfg.experiment`` (or the whole suite for ``all``) and write its files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.experiment is Experiment.ALL:
        todo = list(SUITE) + ([Experiment.REAL_DATA_REPLAY] if cfg.replay_csv else [])
    else:
        todo = [cfg.experiment]
    written: list[Path] = []
    for exp in todo:
        if exp is Experiment.SLIPPAGE:
            written += write_slippage(out, cfg, run_slippage_experiment(cfg))
        elif exp is Experiment.FUNDING_GRID:
            written += write_funding_grid(out, cfg, run_funding_grid(cfg))
        elif exp is Experiment.PNL_HISTOGRAM:
            written += write_pnl_histogram(out, cfg, run_pnl_histogram(cfg))
        elif exp is Experiment.AMM_VS_DPMM:
            written += write_amm_vs_dpmm(out, cfg, run_amm_vs_dpmm(cfg))
        elif exp is Experiment.REAL_DATA_REPLAY:
            if not cfg.replay_csv:
                raise ConfigError("real_data_replay needs replay_csv")
            written += write_replay(out, cfg, run_real_data_replay(cfg.replay_csv, cfg.strike, cfg))
    return written
