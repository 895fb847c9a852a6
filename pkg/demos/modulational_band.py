"""Growth rate across the long-wave band of an mKP-II wave.

Compares the largest real part of the Hill spectrum with the leading-order
prediction (3|gamma|/k) sqrt(Lambda), then locates the numeric band edge.
The two agree to a few parts in 1e4 inside the band and drift apart near
the edge, where the neglected O(a(gamma + a)) terms matter.

    python3 demos/modulational_band.py
"""

import numpy as np

from kdstab import hill
from kdstab.flatspec import PerturbationParams
from kdstab.model import ModelParams, WaveParams
from kdstab.reduced import gamma_max, modulational_prediction
from kdstab.sweep import find_band_edge

mp = ModelParams(rho=0.0, phi=2.0)
wp = WaveParams(k=1.0, a=0.02)
gm = gamma_max(mp, wp)

print(f"predicted band: 0 < |gamma| < {gm:.4f}")
print(f"{'gamma':>8} {'predicted':>12} {'hill':>12} {'ratio':>8}")
for g in gm * np.array([0.1, 0.3, 0.5, 0.7071, 0.9, 0.98, 1.1]):
    pred = modulational_prediction(mp, wp, g).mu_plus.real
    num = hill.max_growth(mp, wp, PerturbationParams(g), refine=True)
    ratio = num / pred if pred > 0 else float("nan")
    print(f"{g:8.5f} {pred:12.4e} {num:12.4e} {ratio:8.4f}")

for a in (0.02, 0.01):
    edge = find_band_edge(mp, WaveParams(1.0, a))
    print(f"a={a}: numeric edge {edge.gamma_edge_numeric:.6f}, "
          f"predicted {edge.gamma_edge_analytic:.6f}, gap {edge.relative_gap:.1e}")
