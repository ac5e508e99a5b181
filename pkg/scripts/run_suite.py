"""Run every experiment at the default settings and print the headline numbers.

    python scripts/run_suite.py --out results/ --seed 0 --workers 2
"""

import argparse
import json
from pathlib import Path

from everlasting_sim.experiments import Experiment, ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", help="optional date,close file to replay")
    args = ap.parse_args()

    cfg = ExperimentConfig(experiment=Experiment.ALL, seed=args.seed, workers=args.workers, replay_csv=args.csv)
    for path in run_experiment(cfg, args.out):
        print("wrote", path)

    orderings = json.loads((args.out / "funding_orderings.json").read_text())
    print("mean |F| decreasing in Q0:", orderings["abs_fee_decreasing_in_q0"])
    print("mean F increasing in K:   ", orderings["fee_increasing_in_strike"])
    levels = json.loads((args.out / "pnl_statistics.json").read_text())["levels"]
    for q, s in levels.items():
        print(f"Q0={q:>9}  mean/Q0={s['mean_pnl_normalized']:.3f}  median/Q0={s['median_pnl_normalized']:.3f}")
    arms = json.loads((args.out / "amm_vs_dpmm_statistics.json").read_text())["arms"]
    for name, s in arms.items():
        print(f"{name:>14}  win={s['win_rate']:.2f}  vol={s['pnl_volatility']:.0f}  sharpe={s['sharpe']:.2f}")


if __name__ == "__main__":
    main()
