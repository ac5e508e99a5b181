"""How often the stochastic directional checks hold across master seeds.

Each master seed is an independent batch of 100 paired runs. The
acceptance suite pins seed 0; this script shows how representative that
single batch is.

    python scripts/seed_sensitivity.py --first 1 --count 24
"""

import argparse

import numpy as np

from everlasting_sim.experiments import (
    ARM_AMM,
    ARM_DPMM,
    ARM_DPMM_UNHEDGED,
    ExperimentConfig,
    run_amm_vs_dpmm,
    run_funding_grid,
    run_pnl_histogram,
)


def checks(seed: int, workers: int) -> dict[str, bool]:
    cfg = ExperimentConfig(seed=seed, workers=workers)
    grid = run_funding_grid(cfg)
    levels = run_pnl_histogram(cfg)
    arms = run_amm_vs_dpmm(cfg)
    qs = sorted(levels)
    medians = [levels[q].statistics.median_pnl for q in qs]
    d, a, u = (arms[k].statistics for k in (ARM_DPMM, ARM_AMM, ARM_DPMM_UNHEDGED))
    return {
        "funding_by_q0": all(grid.abs_fee_decreasing_in_q0().values()),
        "funding_by_k": all(grid.fee_increasing_in_strike().values()),
        "mean_positive": all(levels[q].normalized.mean() > 0 for q in qs),
        "median_monotone": all(x <= y for x, y in zip(medians, medians[1:])),
        "hedging_variance": d.pnl_volatility < u.pnl_volatility,
        "win_rate_gap": d.win_rate - a.win_rate >= 0.10 - 1e-12,
        "volatility_vs_amm": d.pnl_volatility < a.pnl_volatility,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--first", type=int, default=1)
    ap.add_argument("--count", type=int, default=24)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rows = []
    for seed in range(args.first, args.first + args.count):
        r = checks(seed, args.workers)
        rows.append(r)
        print(seed, " ".join(f"{k}={'y' if v else 'n'}" for k, v in r.items()), flush=True)
    print()
    for key in rows[0]:
        hits = int(np.sum([r[key] for r in rows]))
        print(f"{key:>18}: {hits}/{len(rows)}")


if __name__ == "__main__":
    main()
