"""Fit the dynamic probit smoother to a daily market-direction series.

Expects a CSV with one row per trading day and columns

    date, up, lead_up

where ``up`` is 1 when the index closed above its open and ``lead_up`` is
the same indicator for a market that trades earlier in the day. The series
is converted to the package data layout (intercept plus ``lead_up``) and
passed to ``dynprobit compare``.

    python scripts/market_direction.py prices.csv runs/market --draws 10000
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from dynprobit.cli import main as cli_main
from dynprobit.io import write_data, write_json


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        sys.exit(f"{path}: no rows")
    missing = {"up", "lead_up"} - set(rows[0])
    if missing:
        sys.exit(f"{path}: missing columns {sorted(missing)}")
    y = np.array([int(r["up"]) for r in rows])
    x = np.column_stack([np.ones(len(rows)), [float(r["lead_up"]) for r in rows]])
    return y, x


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("prices")
    parser.add_argument("out")
    parser.add_argument("--draws", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    y, x = load(args.prices)
    write_data(out / "data.csv", y, x)
    # random-walk coefficients with small innovations and a diffuse start
    config = {"p": 2, "G": [[1, 0], [0, 1]], "W": [[0.01, 0], [0, 0.01]], "P0": [[3, 0], [0, 3]]}
    write_json(out / "config.json", config)
    return cli_main(
        [
            "compare",
            "--config", str(out / "config.json"),
            "--data", str(out / "data.csv"),
            "--out", str(out / "fit"),
            "--draws", str(args.draws),
            "--seed", str(args.seed),
        ]
    )


if __name__ == "__main__":
    sys.exit(run())
