"""Analytic walkthrough: association, coverage and ASE at the reference point.

Run with ``python demos/walkthrough.py``.  Takes a few seconds.
"""

from dataclasses import replace

import numpy as np

from uavcov import (
    MultiHeightParams,
    SystemParams,
    ase,
    assoc_profile,
    db_to_linear,
    total_coverage,
    total_coverage_multiheight,
)

p = SystemParams()  # cluster spread 5 m, UAVs at 10 m, 1e-4 UAVs and 1e-5 BSs per m^2
print(p)

# who serves the typical UE
prof = assoc_profile(p)
for event, prob in prof.probs.items():
    print(f"  serve {event:8s} {prob:.5f}")
print(f"  total          {prof.total:.8f}")

# coverage at a few thresholds, split by tier
for g in (-5.0, 0.0, 5.0, 10.0):
    rep = total_coverage(p, (db_to_linear(g),) * 3)
    terms = ", ".join(f"{t:.4f}" for t in rep.tier_terms())
    print(f"  gamma {g:5.1f} dB  P_c {rep.total:.4f}  (tiers {terms})")

# raising the UAVs pulls the field tier closer in path loss
for h in (10.0, 20.0, 30.0):
    print(f"  H={h:4.0f} m  P_c {total_coverage(replace(p, height=h)).total:.4f}")

# ASE against UAV density
for lam in np.logspace(-6, -3, 7):
    print(f"  lambda_u {lam:.1e}  ASE {ase(replace(p, lambda_u=lam), 1.0):.3e} bit/s/Hz/m^2")

# two UAV heights, the center UAV flying with the lower group
mh = MultiHeightParams.even_split(p, (10.0, 20.0), anchor_tier=1)
print(f"  two heights  P_c {total_coverage_multiheight(p, mh).total:.4f}")
