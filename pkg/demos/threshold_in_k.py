"""Onset of the modulational instability as the wavenumber grows.

For rho = phi = 1 the prediction is a band only for k > 2|rho/phi| = 2.
Below that the periodic Hill spectra stay on the imaginary axis for every
probed gamma; above it a growing mode appears and strengthens with k.

    python3 demos/threshold_in_k.py
"""

import numpy as np

from kdstab import hill
from kdstab.flatspec import PerturbationParams
from kdstab.model import ModelParams, WaveParams
from kdstab.reduced import band_exists, gamma_max, k_threshold
from kdstab.sweep import threshold_scan

mp = ModelParams(rho=1.0, phi=1.0)
a = 0.02
print(f"predicted threshold k = {k_threshold(mp)}")
# gamma_max is the formula value |...|; it marks a band only when band_exists holds
print(f"{'k':>6} {'band':>5} {'gamma_max':>10} {'max growth':>12}")
for k in (1.5, 1.9, 2.0, 2.1, 2.5, 3.0):
    wp = WaveParams(k, a)
    gm = gamma_max(mp, wp)
    # the growth peaks near gamma_max / sqrt(2)
    g = gm / np.sqrt(2) if gm > 0 else 0.01
    rate = hill.max_growth(mp, wp, PerturbationParams(g), refine=True)
    print(f"{k:6.2f} {str(band_exists(mp, wp)):>5} {gm:10.5f} {rate:12.3e}")

scan = threshold_scan(mp, a, np.arange(1.5, 2.51, 0.05))
print(f"numeric onset by bisection: k = {scan.k_onset:.4f}")
