"""Family-wise error of Tukey-Kramer and size of Shapiro-Wilk under the null."""

import argparse

import numpy as np

from sensing_time.stats import shapiro_wilk, tukey_hsd
from sensing_time.synthgen import REFERENCE_N, draw_delays


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=1000)
    ap.add_argument("--sw-samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=66)
    args = ap.parse_args()

    reject = 0
    for seed in np.random.SeedSequence(args.seed).spawn(args.replicates):
        rng = np.random.default_rng(seed)
        groups = {g: draw_delays(rng, 250.0, 80.0, n) * 20.0 for g, n in REFERENCE_N.items()}
        reject += any(r.p_adj < 0.05 for r in tukey_hsd(groups))
    print(f"Tukey family-wise rate   {reject / args.replicates:.3f}  ({args.replicates} replicates)")

    rng = np.random.default_rng(args.seed)
    size = np.mean([shapiro_wilk(rng.normal(size=20)).p < 0.05 for _ in range(args.sw_samples)])
    print(f"Shapiro-Wilk size, n=20  {size:.4f}  ({args.sw_samples} samples)")


if __name__ == "__main__":
    main()
