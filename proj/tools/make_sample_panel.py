#!/usr/bin/env python3
"""Writes data/zm_tsla_sample.csv: six months of synthetic daily closes.

Two strongly trending, jumpy assets in the spirit of ZM and TSLA during the
first half of 2020. Not real market data.
"""
import argparse
from pathlib import Path

import numpy as np
import pandas as pd

TICKERS = ["ZM", "TSLA"]
START = {"ZM": 68.0, "TSLA": 86.0}
DAILY_DRIFT = np.array([0.0090, 0.0070])
DAILY_VOL = np.array([0.060, 0.055])
CORR = 0.35
JUMP_PROB = 0.02       # per asset per day
JUMP = (0.06, 0.03)    # mean, sd of the log jump


def generate(seed: int) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    dates = pd.bdate_range("2020-01-02", "2020-06-30")
    n = len(dates)
    cov = np.outer(DAILY_VOL, DAILY_VOL) * np.array([[1.0, CORR], [CORR, 1.0]])
    shocks = rng.multivariate_normal(DAILY_DRIFT - 0.5 * DAILY_VOL**2, cov, size=n - 1)
    jumps = (rng.random((n - 1, 2)) < JUMP_PROB) * rng.normal(JUMP[0], JUMP[1], (n - 1, 2))
    log_paths = np.vstack([np.zeros(2), np.cumsum(shocks + jumps, axis=0)])
    prices = np.array([START[t] for t in TICKERS]) * np.exp(log_paths)
    frame = pd.DataFrame(prices.round(4), columns=TICKERS)
    frame.insert(0, "date", dates.strftime("%Y-%m-%d"))
    return frame


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2021)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "zm_tsla_sample.csv")
    args = parser.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    generate(args.seed).to_csv(args.out, index=False)


if __name__ == "__main__":
    main()
