"""Rejection rates of Welch ANOVA and Tukey-Kramer on cohorts drawn at the reference group means."""

import argparse

import numpy as np

from sensing_time.metrics import TrialMetrics
from sensing_time.pipeline import run_cohort
from sensing_time.synthgen import REFERENCE_MEAN_MS, REFERENCE_N, REFERENCE_SD_MS, draw_delays


def cohort_rows(rng):
    rows = []
    for g in sorted(REFERENCE_N):
        n = REFERENCE_N[g]
        st = draw_delays(rng, REFERENCE_MEAN_MS[g], REFERENCE_SD_MS[g], n) * 20
        speed = rng.uniform(3.3, 46.9, n).round(2)
        igd = rng.integers(6, 262, n)
        ttc = rng.uniform(0.5, 10, n).round(3)
        rows += [TrialMetrics(f"{g}_{i:03d}", f"{g}_{i:03d}", g, int(st[i]), float(speed[i]), int(igd[i]),
                              float(ttc[i]), "Valid") for i in range(n)]
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--seed", type=int, default=6)
    args = ap.parse_args()

    welch = pair = 0
    for seed in np.random.SeedSequence(args.seed).spawn(args.replicates):
        rep = run_cohort(cohort_rows(np.random.default_rng(seed)))
        welch += rep.welch.p < 0.01
        pair += rep.tukey_row("fit", "cond_fit").p_adj < 0.05
    print(f"replicates             {args.replicates}")
    print(f"Welch p < 0.01         {welch / args.replicates:.3f}")
    print(f"fit vs cond_fit p<0.05 {pair / args.replicates:.3f}")


if __name__ == "__main__":
    main()
