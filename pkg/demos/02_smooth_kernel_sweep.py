"""Smooth (gaussian) kernel bandwidth sweep.

As tau grows the kernel keeps fewer edges; the spectrum stays
Marchenko-Pastur shaped with the scale compressed by the limiting kernel mean
alpha = 1 - exp(-sigma^2 / tau^2). The raw MP(c, sigma^2) overlay is written
next to each run for comparison.

Run:  python3 demos/02_smooth_kernel_sweep.py
"""

import math

from rmtlab import harness


def main():
    taus = (0.4, 0.7, 1.0, 1.3)
    reports = harness.figure2(p=200, n=500, taus=taus, seed=0, trials=3,
                              out_dir="demo_out/smooth_sweep")
    print("tau    alpha   predicted scale   pooled KS   mean eigenvalue")
    for tau in taus:
        rep = reports[f"{tau:g}"]
        alpha = 1.0 - math.exp(-1.0 / tau**2)
        print(f"{tau:<6g} {alpha:.4f}  {rep['law_params']['scale']:<17.4f} "
              f"{rep['pooled_ks']:<11.4f} {rep['pooled_mean_eigenvalue']:.4f}")
    print("\nEach output directory holds the empirical histogram, the")
    print("predicted MP(c, alpha sigma^2) grid, and law_mp_raw.csv with the")
    print("unscaled MP(c, sigma^2) reference.")


if __name__ == "__main__":
    main()
