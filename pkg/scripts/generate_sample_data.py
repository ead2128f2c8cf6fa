#!/usr/bin/env python3
"""Generate the shipped synthetic block/witness sample (data/sample_blocks.csv).

The real measurement campaign this stands in for is not redistributable, so
the fixture is drawn from the documented generative model below: a discrete
model over the binned quantities, with continuous values sampled uniformly
inside the selected bin. Every learned CPT in the shipped bundle is fitted
from exactly this file, so regenerating it (same seed) reproduces the bundle.

Run from the repository root:

    python scripts/generate_sample_data.py [--rows 500] [--seed 20191126]
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
OUT = REPO / "src" / "oobn_lab" / "stateless" / "data" / "sample_blocks.csv"

# bin edges shared with the bundle metadata (see scripts/build_bundle.py)
DIFFICULTY_BINS = [(2.10e15, 2.30e15), (2.30e15, 2.55e15), (2.55e15, 2.80e15)]
GAS_LIMIT_BINS = [(9.40e6, 9.80e6), (9.80e6, 9.95e6), (9.95e6, 10.10e6)]
TX_BINS = [(10, 80), (80, 160), (160, 320)]
STATE_ENTRY_BINS = [(40, 300), (300, 800), (800, 2400)]
BLOCK_TIME_BINS = [(0.5, 6.0), (6.0, 12.0), (12.0, 30.0)]
WITNESS_SIZE_BINS = [(30e3, 200e3), (200e3, 500e3), (500e3, 1000e3), (1000e3, 2400e3)]
WITNESS_TIME_BINS = [(0.2, 4.0), (4.0, 12.0), (12.0, 28.0)]

# discrete ground truth (states low/medium/high unless noted)
P_DIFFICULTY = [0.30, 0.45, 0.25]
P_GAS_GIVEN_DIFF = [
    [0.55, 0.30, 0.15],
    [0.30, 0.40, 0.30],
    [0.15, 0.30, 0.55],
]
P_TX_GIVEN_GAS = [
    [0.60, 0.30, 0.10],
    [0.25, 0.50, 0.25],
    [0.10, 0.30, 0.60],
]
P_STATE_GIVEN_TX = [
    [0.70, 0.22, 0.08],
    [0.20, 0.55, 0.25],
    [0.06, 0.24, 0.70],
]
# rows ordered (tx, difficulty) with difficulty varying fastest
P_BLOCK_TIME = [
    [0.70, 0.22, 0.08], [0.55, 0.30, 0.15], [0.40, 0.38, 0.22],
    [0.50, 0.34, 0.16], [0.38, 0.40, 0.22], [0.25, 0.43, 0.32],
    [0.32, 0.42, 0.26], [0.22, 0.43, 0.35], [0.12, 0.38, 0.50],
]
# witness size (small/medium/large/veryLarge), rows (difficulty, state entries)
# with state entries varying fastest; driven mostly by state entries
P_WITNESS_SIZE = [
    [0.66, 0.28, 0.056, 0.004], [0.31, 0.45, 0.215, 0.025], [0.07, 0.34, 0.44, 0.15],
    [0.62, 0.30, 0.075, 0.005], [0.28, 0.46, 0.230, 0.030], [0.05, 0.32, 0.46, 0.17],
    [0.58, 0.31, 0.100, 0.010], [0.25, 0.46, 0.250, 0.040], [0.04, 0.29, 0.48, 0.19],
]
P_WITNESS_TIME = [
    [0.88, 0.10, 0.02],
    [0.45, 0.45, 0.10],
    [0.08, 0.52, 0.40],
    [0.03, 0.37, 0.60],
]

FIRST_BLOCK = 8_880_000


def draw(rng: np.random.Generator, probs) -> int:
    return int(rng.choice(len(probs), p=np.asarray(probs) / np.sum(probs)))


def within(rng: np.random.Generator, bins, index: int) -> float:
    lo, hi = bins[index]
    return float(rng.uniform(lo, hi))


def generate(rows: int, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    records = []
    for i in range(rows):
        difficulty = draw(rng, P_DIFFICULTY)
        gas = draw(rng, P_GAS_GIVEN_DIFF[difficulty])
        tx = draw(rng, P_TX_GIVEN_GAS[gas])
        state = draw(rng, P_STATE_GIVEN_TX[tx])
        btime = draw(rng, P_BLOCK_TIME[tx * 3 + difficulty])
        wsize = draw(rng, P_WITNESS_SIZE[difficulty * 3 + state])
        wtime = draw(rng, P_WITNESS_TIME[wsize])
        records.append(
            {
                "block_number": FIRST_BLOCK + i,
                "difficulty": round(within(rng, DIFFICULTY_BINS, difficulty)),
                "gas_limit": round(within(rng, GAS_LIMIT_BINS, gas)),
                "tx_count": int(within(rng, TX_BINS, tx)),
                "state_entries_updated": int(within(rng, STATE_ENTRY_BINS, state)),
                "block_creation_time_s": round(within(rng, BLOCK_TIME_BINS, btime), 3),
                "witness_size_bytes": round(within(rng, WITNESS_SIZE_BINS, wsize)),
                "witness_creation_time_s": round(within(rng, WITNESS_TIME_BINS, wtime), 3),
            }
        )
    return records


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=500)
    parser.add_argument("--seed", type=int, default=20191126)
    parser.add_argument("--out", type=Path, default=OUT)
    args = parser.parse_args()

    records = generate(args.rows, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(records[0].keys()))
        writer.writeheader()
        writer.writerows(records)
    sizes = np.array([r["witness_size_bytes"] for r in records])
    edges = [200e3, 500e3, 1000e3]
    shares = [
        float(np.mean(sizes < edges[0])),
        float(np.mean((sizes >= edges[0]) & (sizes < edges[1]))),
        float(np.mean((sizes >= edges[1]) & (sizes < edges[2]))),
        float(np.mean(sizes >= edges[2])),
    ]
    print(f"wrote {len(records)} rows to {args.out}")
    print("witness size shares (small/medium/large/veryLarge):",
          [round(s, 4) for s in shares])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
