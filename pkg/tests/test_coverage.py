import math
from dataclasses import replace

import numpy as np
import pytest

from uavcov.association import assoc_profile
from uavcov.coverage import (
    ase,
    exclusion_rule,
    laplace_i0,
    laplace_i1,
    laplace_i2,
    params_fingerprint,
    total_coverage,
    total_coverage_multiheight,
)
from uavcov.model import MultiHeightParams, SystemParams, TierRef, db_to_linear
from uavcov.quadrature import Tolerance

P = SystemParams()

# Frozen from tests/oracles.py at a common 0 dB threshold.
ORACLE = {
    (5.0, 10.0): {"0_los": 0.9044498645, "0_nlos": 0.03641209253, "1_los": 0.01409551479,
                  "1_nlos": 8.928313689e-05, "2": 0.003662700656},
    (20.0, 30.0): {"0_los": 0.5533781079, "0_nlos": 0.002591213754, "1_los": 0.128011158,
                   "1_nlos": 0.0001345115728, "2": 0.02167456977},
}
# Laplace transforms for a field UAV serving at path loss 2000, u = l / P1.
ORACLE_LT = {
    (5.0, 10.0): (0.6473626384273843, 0.9725558528894908, 0.9961551095510781),
    (20.0, 30.0): (0.96600972728585, 0.979392979139963, 0.9961551095510781),
}


@pytest.mark.parametrize("key", list(ORACLE))
def test_per_event_coverage_matches_oracle(key):
    sigma, h = key
    rep = total_coverage(replace(P, sigma_c=sigma, height=h))
    for name, ref in ORACLE[key].items():
        assert rep.per_event[name] == pytest.approx(ref, rel=2e-7, abs=1e-11)
    assert rep.total == pytest.approx(sum(ORACLE[key].values()), rel=1e-7)


@pytest.mark.parametrize("key", list(ORACLE_LT))
def test_laplace_transforms_match_oracle(key):
    sigma, h = key
    p = replace(P, sigma_c=sigma, height=h)
    rule = exclusion_rule(TierRef.field(), 2000.0, p)
    u = 2000.0 / p.p_tx[1]
    ref0, ref1, ref2 = ORACLE_LT[key]
    assert laplace_i0(u, rule, p) == pytest.approx(ref0, rel=1e-7)
    assert laplace_i1(u, rule, p) == pytest.approx(ref1, rel=1e-7)
    assert laplace_i2(u, rule, p) == pytest.approx(ref2, rel=1e-10)


RULES = [
    (TierRef.center(), 1500.0),
    (TierRef.field(), 2000.0),
    (TierRef.field(), 5e5),
    (TierRef.bs(), 3e4),
]


@pytest.mark.parametrize("tier,l", RULES)
@pytest.mark.parametrize("which", ["i0", "i1", "i2"])
def test_laplace_invariants(tier, l, which):
    rule = exclusion_rule(tier, l, P)
    f = {"i0": laplace_i0, "i1": laplace_i1, "i2": laplace_i2}[which]
    assert f(0.0, rule, P) == 1.0
    u = np.logspace(-8, 6, 50)
    v = f(u, rule, P)
    assert np.all((v > 0) & (v <= 1.0))
    assert np.all(np.diff(v) <= 1e-12)


def test_center_transform_is_one_when_center_serves():
    rule = exclusion_rule(TierRef.center(), 1500.0, P)
    assert laplace_i0(123.0, rule, P) == 1.0


def test_unnormalized_center_transform_is_below_one_at_zero():
    rule = exclusion_rule(TierRef.field(), 2000.0, P)
    assert laplace_i0(0.0, rule, P, normalization="paper") == pytest.approx(0.3177432551, rel=1e-8)
    with pytest.raises(ValueError):
        laplace_i0(0.0, rule, P, normalization="other")


def test_vanishing_threshold_gives_association_sum():
    rep = total_coverage(P, (1e-9,) * 3)
    assert rep.total == pytest.approx(1.0, abs=2e-3)
    for k, v in rep.per_event.items():
        assert v == pytest.approx(rep.association.probs[k], abs=2e-3)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_nonincreasing_in_each_threshold(k):
    vals = []
    for g in (-10.0, -5.0, 0.0, 5.0, 10.0, 20.0):
        thr = [1.0, 1.0, 1.0]
        thr[k] = db_to_linear(g)
        vals.append(total_coverage(P, tuple(thr)).total)
    assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("g", [-10.0, 0.0, 10.0, 20.0])
def test_removing_noise_helps(g):
    thr = (db_to_linear(g),) * 3
    quiet = replace(P, height=100.0, noise=(0.0, 0.0, 0.0))
    noisy = replace(P, height=100.0)
    assert total_coverage(quiet, thr).total > total_coverage(noisy, thr).total


def test_report_bookkeeping():
    rep = total_coverage(P)
    assert sum(rep.tier_terms()) == pytest.approx(rep.total)
    assert rep.total_err < 1e-5
    assert rep.conditional("0_los") == pytest.approx(rep.per_event["0_los"] / rep.association.a0_los)
    assert rep.params_hash == total_coverage(P).params_hash
    assert params_fingerprint(P) != params_fingerprint(replace(P, height=11.0))


def test_multiheight_reduction():
    for g in (-5.0, 0.0, 10.0):
        thr = (db_to_linear(g),) * 3
        a = total_coverage(P, thr)
        b = total_coverage_multiheight(P, MultiHeightParams.single(P), thr)
        assert b.total == pytest.approx(a.total, abs=1e-6)


def test_ase_structure():
    rep = total_coverage(P)
    uav = sum(v for k, v in rep.per_event.items() if k != "2")
    expect = (P.lambda_u * uav + P.lambda_b * rep.per_event["2"]) * math.log2(2.0)
    assert ase(P, 1.0) == pytest.approx(expect, rel=1e-12)
    # per-tier thresholds leave ASE undefined
    assert total_coverage(P, (1.0, 2.0, 1.0)).ase is None
    with pytest.raises(ValueError):
        ase(P, 0.0)


def test_ase_without_bs_tier():
    p = replace(P, lambda_b=0.0)
    rep = total_coverage(p)
    assert rep.per_event["2"] == 0.0
    assert ase(p, 1.0) == pytest.approx(p.lambda_u * rep.total, rel=1e-12)


def test_tolerance_halving_is_within_error_estimate():
    a = total_coverage(P, tol=Tolerance(rel=1e-5))
    b = total_coverage(P, tol=Tolerance(rel=1e-5).halved())
    assert abs(a.total - b.total) < a.total_err
