"""Black-Scholes calls and the everlasting-call basket.

An everlasting call is approximated by a geometrically decaying basket of
fixed-expiry European calls:

    C_EO = (1/D) * sum_{i=1..n} (D/(D+1))**i * C(S, K, r, sigma, T_i)

All pricing functions broadcast over numpy arrays and return plain floats
for scalar input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .paths import MarketParams

DAYS_PER_YEAR = 365


def normal_cdf(x):
    """Standard normal CDF, accurate to ~1e-15 absolute."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _as_result(x):
    return float(x) if np.ndim(x) == 0 else x


def _d1(s, k, r, sigma, t):
    vol_sqrt_t = sigma * np.sqrt(t)
    return (np.log(s / k) + (r + 0.5 * sigma * sigma) * t) / vol_sqrt_t, vol_sqrt_t


def bs_call(s, k, r, sigma, t):
    """Black-Scholes price of a European call.

    Boundary conventions: ``t <= 0`` returns the payoff ``max(S - K, 0)``;
    ``sigma == 0`` returns the deterministic limit ``max(S - K e^{-rT}, 0)``.
    """
    s, k, r, sigma, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, k, r, sigma, t)))
    expired = t <= 0
    degenerate = ~expired & (sigma * np.sqrt(np.where(expired, 0.0, t)) == 0)
    live = ~(expired | degenerate)

    t_safe = np.where(live, t, 1.0)
    sig_safe = np.where(live, sigma, 1.0)
    d1, vst = _d1(s, k, r, sig_safe, t_safe)
    d2 = d1 - vst
    disc_k = k * np.exp(-r * t_safe)
    price = s * ndtr(d1) - disc_k * ndtr(d2)
    # cancellation can leave a tiny negative residue deep out of the money
    price = np.clip(price, np.maximum(s - disc_k, 0.0), s)

    det = np.maximum(s - k * np.exp(-r * np.where(degenerate, t, 0.0)), 0.0)
    payoff = np.maximum(s - k, 0.0)
    return _as_result(np.where(expired, payoff, np.where(degenerate, det, price)))


def bs_delta(s, k, r, sigma, t):
    """Call delta ``Phi(d1)``.

    At or past expiry the delta is 1 above the strike, 0 below and 0.5 at
    the money; with zero volatility the same rule applies to the
    discounted strike.
    """
    s, k, r, sigma, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, k, r, sigma, t)))
    expired = t <= 0
    degenerate = ~expired & (sigma * np.sqrt(np.where(expired, 0.0, t)) == 0)
    live = ~(expired | degenerate)

    t_safe = np.where(live, t, 1.0)
    sig_safe = np.where(live, sigma, 1.0)
    d1, _ = _d1(s, k, r, sig_safe, t_safe)
    live_delta = ndtr(d1)

    pivot = np.where(degenerate, k * np.exp(-r * np.where(degenerate, t, 0.0)), k)
    step = np.where(s > pivot, 1.0, np.where(s < pivot, 0.0, 0.5))
    return _as_result(np.where(live, live_delta, step))


@dataclass(frozen=True)
class OptionSpec:
    """Strike plus the decaying-weight maturity basket of an everlasting call.

    ``maturities`` defaults to the daily grid ``i/365, i = 1..basket_size``.
    ``normalize`` divides by the truncated weight sum instead of ``D`` so a
    constant integrand is reproduced exactly at finite ``n``.
    """

    strike: float
    decay_factor: int = 1
    basket_size: int = 365
    maturities: tuple[float, ...] | None = None
    normalize: bool = True
    _weights: np.ndarray = field(init=False, repr=False, compare=False)
    _grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.strike) and self.strike > 0):
            raise ValueError(f"strike must be positive, got {self.strike}")
        if int(self.decay_factor) != self.decay_factor or self.decay_factor < 1:
            raise ValueError(f"decay_factor must be an integer >= 1, got {self.decay_factor}")
        if int(self.basket_size) != self.basket_size or self.basket_size < 1:
            raise ValueError(f"basket_size must be an integer >= 1, got {self.basket_size}")
        if self.maturities is None:
            grid = np.arange(1, self.basket_size + 1, dtype=float) / DAYS_PER_YEAR
        else:
            grid = np.asarray(self.maturities, dtype=float)
            if grid.shape != (self.basket_size,):
                raise ValueError("maturities must have basket_size entries")
            if grid[0] <= 0 or np.any(np.diff(grid) <= 0):
                raise ValueError("maturities must be positive and strictly increasing")
        object.__setattr__(self, "_grid", grid)
        object.__setattr__(self, "_weights", basket_weights(self.decay_factor, self.basket_size, self.normalize))

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def weights(self) -> np.ndarray:
        return self._weights


def basket_weights(decay_factor: int, basket_size: int, normalize: bool = True) -> np.ndarray:
    """Weights ``(1/D) (D/(D+1))**i`` for ``i = 1..n``.

    With ``normalize`` the weights are rescaled to sum to one.
    """
    d = float(decay_factor)
    i = np.arange(1, basket_size + 1, dtype=float)
    w = (d / (d + 1.0)) ** i
    if normalize:
        return w / w.sum()
    return w / d


def basket_sum(integrand, spec: OptionSpec):
    """Weighted basket ``sum_i w_i f(T_i)`` for an arbitrary maturity integrand.

    ``integrand`` maps the maturity grid (shape ``(n,)``) to values of shape
    ``(..., n)``.
    """
    return _as_result(np.asarray(integrand(spec.grid), dtype=float) @ spec.weights)


def everlasting_call_price(s, spec: OptionSpec, p: MarketParams):
    """Everlasting call value as a weighted basket of ``bs_call`` prices.

    ``s`` may be an array of spot prices; the basket is evaluated on an
    outer grid of spots x maturities.
    """
    s_arr = np.asarray(s, dtype=float)
    calls = bs_call(s_arr[..., None], spec.strike, p.r, p.sigma, spec.grid)
    return _as_result(calls @ spec.weights)


def everlasting_call_delta(s, spec: OptionSpec, p: MarketParams):
    """Spot derivative of :func:`everlasting_call_price` (same weights)."""
    s_arr = np.asarray(s, dtype=float)
    deltas = bs_delta(s_arr[..., None], spec.strike, p.r, p.sigma, spec.grid)
    return _as_result(deltas @ spec.weights)


def everlasting_price_and_delta(s, spec: OptionSpec, p: MarketParams) -> tuple[np.ndarray, np.ndarray]:
    """Price and delta for a vector of spots, sharing one ``d1`` evaluation."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))[:, None]
    t = spec.grid[None, :]
    if p.sigma == 0:
        return (bs_call(s_arr, spec.strike, p.r, 0.0, t) @ spec.weights,
                bs_delta(s_arr, spec.strike, p.r, 0.0, t) @ spec.weights)
    d1, vst = _d1(s_arr, spec.strike, p.r, p.sigma, t)
    n1 = ndtr(d1)
    disc_k = spec.strike * np.exp(-p.r * t)
    calls = s_arr * n1 - disc_k * ndtr(d1 - vst)
    calls = np.clip(calls, np.maximum(s_arr - disc_k, 0.0), s_arr)
    return calls @ spec.weights, n1 @ spec.weights
