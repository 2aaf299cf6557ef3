#!/usr/bin/env python3
"""Plot median and 1-sigma band of RMSE, MI and RSU from benchmark.csv."""

import argparse
import csv
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def column(rows, name):
    return [float(r[name]) if r[name] else math.nan for r in rows]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="benchmark.csv written by 'pairpref benchmark'")
    parser.add_argument("-o", "--out", default="benchmark.png", help="output image")
    args = parser.parse_args()

    with open(args.csv, newline="") as f:
        rows = list(csv.DictReader(f))
    steps = [int(r["step"]) for r in rows]

    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
    for ax, key, label in zip(
        axes, ("rmse", "mi", "rsu"), ("RMSE of theta", "MI (bits)", "running RSU (bits)")
    ):
        med = column(rows, key + "_median")
        lo = column(rows, key + "_lo")
        hi = column(rows, key + "_hi")
        ax.plot(steps, med, color="C0")
        ax.fill_between(steps, lo, hi, color="C0", alpha=0.25, linewidth=0)
        ax.set_xlabel("step")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
