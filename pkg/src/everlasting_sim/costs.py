"""Daily funding fees and on-chain transaction costs."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class CostConfig:
    """Gas/impact cost parameters (USDC) and the denominator floor."""

    gas_base: float = 2.0
    impact_cost: float = 5.0
    congestion: float = 0.5
    denom_floor: float = 0.05

    def __post_init__(self):
        if self.gas_base < 0 or self.impact_cost < 0:
            raise ValueError("gas_base and impact_cost must be non-negative")
        if self.congestion < 0:
            raise ValueError("congestion must be non-negative")
        if not self.denom_floor > 0:
            raise ValueError("denom_floor must be positive")


@dataclass(frozen=True)
class FundingRecord:
    day: int
    mark_price: float
    payoff: float
    fee: float


def funding_fee(mark_price: float, s: float, k: float) -> float:
    """Per-contract fee ``mark - max(S - K, 0)``; positive means longs pay shorts."""
    if mark_price < 0:
        raise ValueError("mark_price must be non-negative")
    return mark_price - max(s - k, 0.0)


def funding_record(day: int, mark_price: float, s: float, k: float) -> FundingRecord:
    payoff = max(s - k, 0.0)
    return FundingRecord(day, mark_price, payoff, funding_fee(mark_price, s, k))


def transaction_cost(cfg: CostConfig, q0: float, inventory: float, sigma: float,
                     n_draw: float, u_draw: float) -> float:
    """Gas plus a liquidity-scaled impact charge.

    ``G_b + i_m * Q0 / max(Q0 + V (1 - sigma) N, eps * Q0) * (1 + eta U)``.
    The floor keeps the charge finite and positive when an adverse normal
    draw would drive effective liquidity to zero or below.
    """
    denom = max(q0 + inventory * (1.0 - sigma) * n_draw, cfg.denom_floor * q0)
    cost = cfg.gas_base + cfg.impact_cost * q0 / denom * (1.0 + cfg.congestion * u_draw)
    if not math.isfinite(cost):
        raise ValueError("non-finite transaction cost")
    return cost
