"""Underlying price paths: seeded GBM generation and CSV ingestion."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import IO, Iterable

import numpy as np


@dataclass(frozen=True)
class MarketParams:
    """GBM / Black-Scholes parameter bundle. Rates are annualized."""

    s0: float = 3000.0
    mu: float = 0.03
    sigma: float = 0.6
    r: float = 0.0
    dt: float = 1.0 / 365.0

    def __post_init__(self):
        for name in ("s0", "mu", "sigma", "r", "dt"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.s0 <= 0:
            raise ValueError(f"s0 must be positive, got {self.s0}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class RngSeed:
    """A master seed plus a per-path sub-stream index.

    The pair fully determines every draw made for that path, independent
    of how many other streams exist or in which order they are consumed.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream must be non-negative")

    def generator(self, purpose: int = 0) -> np.random.Generator:
        """Independent generator for one use (price, flow, costs, ...) of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, purpose))
        return np.random.Generator(np.random.PCG64(ss))


# sub-stream purposes
PRICE_DRAWS = 0
FLOW_DRAWS = 1
COST_DRAWS = 2


@dataclass(frozen=True)
class PricePath:
    """Daily closes. ``origin`` is ``("simulated", seed)`` or ``("ingested", source)``."""

    prices: np.ndarray
    origin: tuple
    dates: tuple[date, ...] | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 1 or prices.size < 2:
            raise ValueError("a price path needs at least two prices")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise ValueError("prices must be finite and positive")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)

    def __len__(self):
        return self.prices.size

    @property
    def horizon_days(self) -> int:
        return self.prices.size - 1

    def log_returns(self) -> np.ndarray:
        return np.diff(np.log(self.prices))


def gbm_step(s: float, p: MarketParams, z: float) -> float:
    """One exact GBM step: ``s * exp((mu - sigma^2/2) dt + sigma sqrt(dt) z)``."""
    if not (math.isfinite(s) and math.isfinite(z)):
        raise ValueError("gbm_step inputs must be finite")
    if s <= 0:
        raise ValueError(f"price must be positive, got {s}")
    return s * math.exp((p.mu - 0.5 * p.sigma**2) * p.dt + p.sigma * math.sqrt(p.dt) * z)


def gbm_log_increments(p: MarketParams, z: np.ndarray) -> np.ndarray:
    return (p.mu - 0.5 * p.sigma**2) * p.dt + p.sigma * math.sqrt(p.dt) * np.asarray(z, dtype=float)


def generate_path(p: MarketParams, horizon_days: int, seed: RngSeed) -> PricePath:
    """Simulate ``horizon_days`` daily GBM steps starting at ``p.s0``."""
    if horizon_days < 1:
        raise ValueError("horizon_days must be >= 1")
    z = seed.generator(PRICE_DRAWS).standard_normal(horizon_days)
    log_path = np.concatenate(([0.0], np.cumsum(gbm_log_increments(p, z))))
    return PricePath(p.s0 * np.exp(log_path), origin=("simulated", seed))


def sample_one_step_log_returns(p: MarketParams, n: int, seed: RngSeed) -> np.ndarray:
    """``n`` independent one-step log returns ``ln(S_1/S_0)`` (moment checks)."""
    z = seed.generator(PRICE_DRAWS).standard_normal(n)
    return gbm_log_increments(p, z)


class PriceCsvError(ValueError):
    """Malformed or invalid price CSV. ``line`` is 1-based, header = line 1."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def ingest_price_csv(source: IO | bytes | str | Iterable[str], source_id: str = "<stream>") -> PricePath:
    """Read a ``date,close`` CSV with ISO-8601 dates into a :class:`PricePath`.

    Dates must be strictly increasing and closes positive. Blank lines are
    skipped; any other malformed row raises :class:`PriceCsvError` naming
    its line.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    elif hasattr(source, "read") and isinstance(source.read(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise PriceCsvError("empty file") from None
    if [h.strip().lower() for h in header] != ["date", "close"]:
        raise PriceCsvError(f"expected header 'date,close', got {','.join(header)!r}", line=1)

    dates: list[date] = []
    closes: list[float] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise PriceCsvError(f"expected 2 fields, got {len(row)}", line=line)
        try:
            d = date.fromisoformat(row[0].strip())
        except ValueError:
            raise PriceCsvError(f"bad ISO date {row[0]!r}", line=line) from None
        try:
            close = float(row[1])
        except ValueError:
            raise PriceCsvError(f"bad close value {row[1]!r}", line=line) from None
        if not math.isfinite(close) or close <= 0:
            raise PriceCsvError(f"close must be positive, got {row[1].strip()}", line=line)
        if dates and d <= dates[-1]:
            raise PriceCsvError(f"date {d} is not after {dates[-1]}", line=line)
        dates.append(d)
        closes.append(close)

    if len(closes) < 2:
        raise PriceCsvError("need at least two price rows")
    return PricePath(np.array(closes), origin=("ingested", source_id), dates=tuple(dates))
