"""Inventory-sensitive quoting (DPMM), the static AMM baseline and
fragmented fixed-expiry pools.

Inventory ``V`` is counted in contracts and is positive when traders are
net long, i.e. the pool is short.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .paths import MarketParams
from .pricing import bs_call


class PricingMode(str, enum.Enum):
    DPMM = "dpmm"
    STATIC_AMM = "static_amm"


@dataclass(frozen=True)
class PoolConfig:
    """Static pool parameters.

    ``signed_adjustment`` applies ``sign(V)`` to the inventory term so that
    a pool that is net long options quotes below theoretical value; with
    it off the quote follows the unsigned curve ``1 + k (V/Q0)^2``.
    """

    q0: float
    k_shape: float
    inventory_cap: float
    pricing_mode: PricingMode = PricingMode.DPMM
    signed_adjustment: bool = True

    def __post_init__(self):
        if not self.q0 > 0:
            raise ValueError(f"q0 must be positive, got {self.q0}")
        if not self.k_shape >= 0:
            raise ValueError(f"k_shape must be non-negative, got {self.k_shape}")
        if not self.inventory_cap > 0:
            raise ValueError(f"inventory_cap must be positive, got {self.inventory_cap}")
        object.__setattr__(self, "pricing_mode", PricingMode(self.pricing_mode))


@dataclass
class PoolState:
    inventory: float = 0.0
    hedge_position: float = 0.0
    cash: float = 0.0


def default_inventory_cap(q0: float, option_price: float, fraction: float = 0.5) -> float:
    """Contracts whose theoretical value adds up to ``fraction * q0``."""
    if option_price <= 0:
        raise ValueError("option_price must be positive to size the inventory cap")
    return fraction * q0 / option_price


def inventory_premium(cfg: PoolConfig, inventory: float) -> float:
    """Relative quote adjustment ``mark / i_value - 1`` before the zero floor."""
    if cfg.pricing_mode is PricingMode.STATIC_AMM:
        return 0.0
    return _dpmm_adjustment(cfg, inventory)


def _dpmm_adjustment(cfg: PoolConfig, inventory: float) -> float:
    ratio = inventory / cfg.q0
    adj = cfg.k_shape * ratio * ratio
    if cfg.signed_adjustment:
        adj *= np.sign(inventory)
    return float(adj)


def dpmm_mark_price(i_value: float, cfg: PoolConfig, st: PoolState) -> float:
    """``i_value * (1 + k [sign(V)] (V/Q0)^2)``, floored at zero."""
    if i_value < 0:
        raise ValueError("i_value must be non-negative")
    return max(i_value * (1.0 + _dpmm_adjustment(cfg, st.inventory)), 0.0)


def static_amm_mark_price(i_value: float) -> float:
    if i_value < 0:
        raise ValueError("i_value must be non-negative")
    return i_value


def mark_price(i_value: float, cfg: PoolConfig, st: PoolState) -> float:
    """Quote according to ``cfg.pricing_mode``."""
    if cfg.pricing_mode is PricingMode.STATIC_AMM:
        return static_amm_mark_price(i_value)
    return dpmm_mark_price(i_value, cfg, st)


@dataclass(frozen=True)
class SlippagePoint:
    trade_size: float
    slippage: float
    rejected: bool = False


def slippage_curve(i_value: float, cfg: PoolConfig, base_inventory: float,
                   trade_sizes: Sequence[float]) -> list[SlippagePoint]:
    """Marginal relative slippage ``mark(V + q) / i_value - 1`` per trade size.

    The ratio is evaluated as the quote adjustment itself (``-1`` where the
    zero floor binds) rather than by dividing two rounded prices. Trades that would push inventory past the cap are returned flagged as
    rejected with a NaN slippage.
    """
    if i_value <= 0:
        raise ValueError("i_value must be positive to express relative slippage")
    out = []
    for q in trade_sizes:
        v = base_inventory + q
        if abs(v) > cfg.inventory_cap:
            out.append(SlippagePoint(float(q), float("nan"), rejected=True))
            continue
        out.append(SlippagePoint(float(q), max(inventory_premium(cfg, v), -1.0)))
    return out


@dataclass
class ExpiryPool:
    month: int
    config: PoolConfig
    state: PoolState = field(default_factory=PoolState)

    @property
    def maturity(self) -> float:
        return self.month / 12.0


@dataclass
class FragmentedPools:
    """Fixed-expiry pools sharing one liquidity budget equally."""

    pools: list[ExpiryPool]

    def __post_init__(self):
        if not self.pools:
            raise ValueError("need at least one pool")

    @classmethod
    def split(cls, total: PoolConfig, months: Sequence[int] = (1, 2, 3, 4, 5, 6)) -> "FragmentedPools":
        m = len(months)
        per_pool = replace(total, q0=total.q0 / m, inventory_cap=total.inventory_cap / m)
        return cls([ExpiryPool(month, per_pool) for month in months])

    @property
    def total_q0(self) -> float:
        return sum(p.config.q0 for p in self.pools)

    def pool(self, month: int) -> ExpiryPool:
        for p in self.pools:
            if p.month == month:
                return p
        raise KeyError(f"no pool for expiry month {month}")


def fragmented_quote(s: float, month: int, pools: FragmentedPools, strike: float,
                     market: MarketParams) -> float:
    """Mark price of the fixed-expiry call held in pool ``month``."""
    pool = pools.pool(month)
    i_value = bs_call(s, strike, market.r, market.sigma, pool.maturity)
    return mark_price(i_value, pool.config, pool.state)
