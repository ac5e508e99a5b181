"""Daily liquidity-provider loop for one everlasting-call pool.

Each day: the underlying moves, the previous hedge is marked, traders
trade, the pool re-quotes, funding accrues, the hedge is rebalanced and
the day's costs are charged. Cumulative PnL follows

    pnl[t] = pnl[t-1] + hedge_pnl + funding - tx_cost

evaluated in exactly that order so the recurrence can be re-checked bit
for bit from the ledger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .costs import CostConfig, funding_fee, transaction_cost
from .market import PoolConfig, PoolState, inventory_premium, mark_price
from .paths import COST_DRAWS, FLOW_DRAWS, MarketParams, PricePath, RngSeed
from .pricing import OptionSpec, everlasting_call_delta, everlasting_price_and_delta


class SimulationError(RuntimeError):
    """A run produced a non-finite quantity and was aborted."""


@dataclass(frozen=True)
class FlowModel:
    """Net trader demand for everlasting calls.

    Daily demand notional (USDC) is

        (liquidity_share * Q0 + base_notional)
            * (drift + momentum_beta * r_t + noise_scale * z - price_elasticity * premium)

    where ``r_t`` is the day's log return, ``z`` a seeded normal draw and
    ``premium`` the pool's relative quote adjustment ``mark / i_value - 1``
    ahead of the trade. Demand is converted to contracts at the option's
    theoretical value at inception, clipped to ``max_daily_flow`` and then
    to the pool's inventory cap.

    ``max_daily_flow=None`` means 10% of the inventory cap.
    """

    momentum_beta: float = 13.0
    noise_scale: float = 0.25
    liquidity_share: float = 0.05
    base_notional: float = 4.0
    drift: float = 0.0
    price_elasticity: float = 8.0
    max_daily_flow: float | None = None

    def __post_init__(self):
        for name in ("momentum_beta", "noise_scale", "liquidity_share", "base_notional", "drift", "price_elasticity"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.noise_scale < 0 or self.liquidity_share < 0 or self.base_notional < 0:
            raise ValueError("noise_scale, liquidity_share and base_notional must be non-negative")
        if self.price_elasticity < 0:
            raise ValueError("price_elasticity must be non-negative")
        if self.max_daily_flow is not None and not (math.isfinite(self.max_daily_flow) and self.max_daily_flow >= 0):
            raise ValueError("max_daily_flow must be a non-negative number")

    def notional_scale(self, q0: float) -> float:
        return self.liquidity_share * q0 + self.base_notional

    def daily_cap(self, pool: PoolConfig) -> float:
        if self.max_daily_flow is None:
            return 0.1 * pool.inventory_cap
        if self.max_daily_flow > pool.inventory_cap:
            raise ValueError("max_daily_flow exceeds the inventory cap")
        return self.max_daily_flow


NO_FLOW = FlowModel(momentum_beta=0.0, noise_scale=0.0, drift=0.0, price_elasticity=0.0)


@dataclass(frozen=True)
class StrategyConfig:
    """LP hedging policy plus the trader-flow assumption.

    ``literal_funding`` books the per-contract fee itself each day instead
    of ``inventory * fee``.
    """

    hedge_ratio: float = 1.0
    rebalance_threshold: float = 0.0
    flow: FlowModel = field(default_factory=FlowModel)
    initial_inventory: float = 0.0
    literal_funding: bool = False

    def __post_init__(self):
        if not 0.0 <= self.hedge_ratio <= 1.0:
            raise ValueError(f"hedge_ratio must lie in [0, 1], got {self.hedge_ratio}")
        if not self.rebalance_threshold >= 0:
            raise ValueError("rebalance_threshold must be non-negative")


@dataclass(frozen=True)
class DailyLedgerEntry:
    day: int
    price: float
    inventory: float
    mark_price: float
    funding_fee: float
    funding: float
    tx_cost: float
    hedge_pnl: float
    hedge_position: float
    cumulative_pnl: float

    FIELDS = ("day", "price", "inventory", "mark_price", "funding_fee", "funding",
              "tx_cost", "hedge_pnl", "hedge_position", "cumulative_pnl")


@dataclass(frozen=True)
class RunResult:
    ledger: tuple[DailyLedgerEntry, ...]
    q0: float

    @property
    def final_pnl(self) -> float:
        return self.ledger[-1].cumulative_pnl if self.ledger else 0.0

    @property
    def final_pnl_normalized(self) -> float:
        return self.final_pnl / self.q0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(e, name) for e in self.ledger])


def trader_flow(day: int, path: PricePath, flow: FlowModel, pool: PoolConfig, inventory: float,
                z: float, contract_value: float) -> float:
    """Signed contracts traders buy from the pool on ``day`` (>= 1)."""
    if day < 1:
        raise ValueError("trader flow starts on day 1")
    if contract_value <= 0:
        raise ValueError("contract_value must be positive")
    r_t = math.log(path.prices[day] / path.prices[day - 1])
    premium = max(inventory_premium(pool, inventory), -1.0)
    notional = flow.notional_scale(pool.q0) * (
        flow.drift + flow.momentum_beta * r_t + flow.noise_scale * z - flow.price_elasticity * premium
    )
    cap = flow.daily_cap(pool)
    demand = min(max(notional / contract_value, -cap), cap)
    new_inventory = min(max(inventory + demand, -pool.inventory_cap), pool.inventory_cap)
    return new_inventory - inventory


def net_delta(st: PoolState, s: float, spec: OptionSpec, p: MarketParams) -> float:
    return st.inventory * everlasting_call_delta(s, spec, p)


def target_hedge(delta_net: float, h: float) -> float:
    if not 0.0 <= h <= 1.0:
        raise ValueError("hedge ratio must lie in [0, 1]")
    return -h * delta_net


@dataclass(frozen=True)
class DayInputs:
    """Everything ``run_day`` needs beyond the pool state.

    ``i_value`` and ``delta`` are the everlasting call's theoretical value
    and delta at ``price``; ``demand`` is the (already capped) trader flow.
    """

    day: int
    price: float
    prev_price: float
    i_value: float
    delta: float
    demand: float
    n_draw: float
    u_draw: float


@dataclass(frozen=True)
class RunContext:
    spec: OptionSpec
    market: MarketParams
    pool: PoolConfig
    costs: CostConfig
    strategy: StrategyConfig


def run_day(state: PoolState, inp: DayInputs, ctx: RunContext) -> DailyLedgerEntry:
    """Advance ``state`` by one day in place and return the ledger entry.

    ``state.cash`` carries the cumulative PnL.
    """
    hedge_pnl = state.hedge_position * (inp.price - inp.prev_price)

    state.inventory += inp.demand
    if abs(state.inventory) > ctx.pool.inventory_cap:
        raise SimulationError(f"day {inp.day}: inventory {state.inventory} exceeds cap {ctx.pool.inventory_cap}")

    mark = mark_price(inp.i_value, ctx.pool, state)
    fee = funding_fee(mark, inp.price, ctx.spec.strike)
    funding = fee if ctx.strategy.literal_funding else state.inventory * fee

    target = target_hedge(state.inventory * inp.delta, ctx.strategy.hedge_ratio)
    trade = target - state.hedge_position
    rebalance = trade != 0.0 and abs(trade) >= ctx.strategy.rebalance_threshold
    if rebalance:
        state.hedge_position = target
    if rebalance or inp.demand != 0.0:
        tx_cost = transaction_cost(ctx.costs, ctx.pool.q0, state.inventory, ctx.market.sigma, inp.n_draw, inp.u_draw)
    else:
        tx_cost = 0.0

    state.cash = state.cash + hedge_pnl + funding - tx_cost

    entry = DailyLedgerEntry(inp.day, inp.price, state.inventory, mark, fee, funding, tx_cost,
                             hedge_pnl, state.hedge_position, state.cash)
    if not all(math.isfinite(x) for x in (mark, fee, funding, tx_cost, hedge_pnl, state.hedge_position, state.cash)):
        raise SimulationError(f"non-finite value on day {inp.day}: {entry}")
    return entry


def run_simulation(path: PricePath, ctx: RunContext, seed: RngSeed) -> RunResult:
    """Run the daily loop over ``path``; flow and cost draws come from ``seed``."""
    horizon = path.horizon_days
    flow_z = seed.generator(FLOW_DRAWS).standard_normal(horizon)
    cost_rng = seed.generator(COST_DRAWS)
    cost_n = cost_rng.standard_normal(horizon)
    cost_u = cost_rng.uniform(size=horizon)

    values, deltas = everlasting_price_and_delta(path.prices, ctx.spec, ctx.market)
    contract_value = float(everlasting_price_and_delta([path.prices[0]], ctx.spec, ctx.market)[0][0])
    if not contract_value > 0:
        raise SimulationError("option has zero theoretical value at inception; cannot size trader flow")

    state = PoolState(inventory=ctx.strategy.initial_inventory)
    if abs(state.inventory) > ctx.pool.inventory_cap:
        raise ValueError("initial inventory exceeds the inventory cap")
    flow = ctx.strategy.flow
    ledger = []
    for day in range(1, horizon + 1):
        demand = trader_flow(day, path, flow, ctx.pool, state.inventory, flow_z[day - 1], contract_value)
        inp = DayInputs(day, float(path.prices[day]), float(path.prices[day - 1]), float(values[day]),
                        float(deltas[day]), demand, float(cost_n[day - 1]), float(cost_u[day - 1]))
        ledger.append(run_day(state, inp, ctx))
    return RunResult(tuple(ledger), ctx.pool.q0)
