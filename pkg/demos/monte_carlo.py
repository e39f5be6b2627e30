"""Monte Carlo check of the analytic coverage at the reference point.

Run with ``python demos/monte_carlo.py [realizations]``.  About one minute
per 70000 realizations on one core.
"""

import sys

from uavcov import SimConfig, SystemParams, assoc_profile, db_to_linear, simulate, total_coverage

n = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
p = SystemParams()
run = simulate(p, SimConfig(n_realizations=n, seed=1))

# association frequencies against the analytic probabilities
prof = assoc_profile(p)
for event, est in run.association().items():
    print(f"  {event:8s} MC {est.mean:.5f} +- {est.stderr:.5f}   analytic {prof.probs[event]:.5f}")

# coverage at two thresholds
for g in (-5.0, 0.0):
    thr = (db_to_linear(g),) * 3
    tot, _ = run.coverage(thr)
    lo, hi = tot.ci
    print(f"  gamma {g:4.1f} dB  MC {tot.mean:.4f} [{lo:.4f}, {hi:.4f}]   analytic {total_coverage(p, thr).total:.4f}")
