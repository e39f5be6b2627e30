"""SINR coverage probability and area spectral efficiency.

Given association with tier ``k`` at serving path loss ``l`` and Rayleigh
fading on the serving link, the conditional coverage is

    exp(-u sigma_k^2) * prod_j L_{I_j}(u),        u = Gamma_k l / P_k,

where ``L_{I_j}`` is the Laplace transform of the interference from tier
``j`` restricted to nodes outside that tier's exclusion threshold.  The
coverage term of an event is the association integrand of
:mod:`uavcov.association` multiplied by this factor.

Laplace transforms
------------------
* field UAVs / BSs: PPP probability generating functional,
  ``exp(-int_E^inf T/(T + x) Lambda'(dx))`` with ``T = u P_j``;
* center UAV (only when it is not the server): the single node is known to
  have path loss above ``E``.  ``normalization="paper"`` returns the
  unnormalised integral ``int_E^inf x/(x + T) f(x) dx`` taken literally from
  the derivation; ``"conditioned"`` divides by ``P(L_0 > E)`` so the result
  is a genuine conditional expectation (equal to 1 at ``u = 0``).
  Because the event integrand already carries ``P(L_0 > E)``, only the
  conditioned form reproduces the simulated network.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import hyp2f1

from . import pathloss as pl
from .association import (
    AssociationProfile,
    Event,
    Network,
    build_network,
    event_integral,
    exclusion_thresholds,
    profile_for,
)
from .model import MultiHeightParams, SystemParams, TierKind, TierRef
from .quadrature import DEFAULT_TOL, Tolerance, integrate_semi_infinite_batch

NORMALIZATIONS = ("conditioned", "paper")


@dataclass(frozen=True)
class ExclusionRule:
    """Exclusion thresholds implied by association with ``serving_tier`` at
    path loss ``serving_pathloss`` (scalar or array)."""

    serving_tier: TierRef
    serving_pathloss: object
    thresholds: dict

    def threshold(self, tier: TierRef):
        return self.thresholds[tier]


def exclusion_rule(serving_tier: TierRef, serving_pathloss, params: SystemParams,
                   mh: MultiHeightParams | None = None) -> ExclusionRule:
    net = build_network(params, mh)
    return _rule(net, serving_tier, serving_pathloss)


def _rule(net: Network, tier: TierRef, l) -> ExclusionRule:
    l = np.asarray(l, dtype=float)
    return ExclusionRule(tier, l, exclusion_thresholds(net, tier, l))


def _as_arrays(u, rule):
    u = np.asarray(u, dtype=float)
    l = np.asarray(rule.serving_pathloss, dtype=float)
    u, l = np.broadcast_arrays(u, l)
    return u, l


def _ret(u, value):
    return float(value) if np.ndim(u) == 0 else value


# -- center UAV -------------------------------------------------------------

def _center_laplace(net: Network, u, E, tol: Tolerance, normalization: str):
    p = net.center
    T = u * net.center_power
    unnorm = np.zeros_like(u)
    for s in pl.STATES:
        R0 = np.asarray(pl.horizontal_distance(E, s, p))
        tail = np.asarray(pl.center_state_tail(R0, s, p))
        # int P_s f_D * T/(T + L) over the tail; subtract from the tail mass.
        live = (T > 0) & (tail > 0)
        loss = np.zeros_like(u)
        if np.any(live):
            Tl = T[live]

            def f(d, o, Tl=Tl, s=s):
                L = pl.pathloss_uav(d, s, p)
                return (np.asarray(pl.p_state(d, s, p)) * pl.cluster_pdf(d, p.sigma_c)
                        * (Tl[o] / (Tl[o] + L)))

            res = integrate_semi_infinite_batch(f, R0[live], tol, scale=p.sigma_c).require("L_I0")
            loss[live] = res.value
        unnorm = unnorm + np.maximum(tail - loss, 0.0)
    if normalization == "paper":
        return unnorm
    mass = np.asarray(net.center_ccdf_fn(E), dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(mass > 0, unnorm / mass, 1.0)
    return np.clip(out, 0.0, 1.0)


def laplace_i0(u, rule: ExclusionRule, params: SystemParams, tol: Tolerance = DEFAULT_TOL,
               normalization: str = "conditioned", center_ccdf: str = "exact",
               mh: MultiHeightParams | None = None):
    """Laplace transform of the center-UAV interference at ``u`` (1/W)."""
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    u, l = _as_arrays(u, rule)
    if rule.serving_tier.kind is TierKind.CENTER_UAV:
        return _ret(u, np.ones_like(u))
    net = build_network(params, mh, center_ccdf)
    E = np.broadcast_to(rule.threshold(TierRef.center()), u.shape)
    return _ret(u, _center_laplace(net, u, np.asarray(E, dtype=float), tol.inner(), normalization))


# -- field UAVs ---------------------------------------------------------------

def _uav_exponent(p: SystemParams, power, u, E, tol: Tolerance):
    """sum over states of int_E^inf T/(T + x) Lambda'_s(dx), in distance form."""
    T = u * power
    total = np.zeros_like(u)
    if p.lambda_u == 0.0:
        return total
    live = T > 0
    if not np.any(live):
        return total
    Tl = T[live]
    for s in pl.STATES:
        R0 = np.asarray(pl.horizontal_distance(E[live], s, p))
        rT = np.asarray(pl.horizontal_distance(Tl, s, p))
        scale = np.maximum.reduce([np.full_like(R0, p.height), R0, rT])

        def f(r, o, s=s):
            L = pl.pathloss_uav(r, s, p)
            return np.asarray(pl.p_state(r, s, p)) * r * (Tl[o] / (Tl[o] + L))

        # The exponent feeds exp(); bound its absolute error by rel.
        etol = Tolerance(tol.rel, tol.rel, tol.max_evals)
        res = integrate_semi_infinite_batch(f, R0, etol, scale=scale).require("L_I1")
        total[live] += 2.0 * np.pi * p.lambda_u * res.value
    return total


def laplace_i1(u, rule: ExclusionRule, params: SystemParams, tol: Tolerance = DEFAULT_TOL,
               mh: MultiHeightParams | None = None, m: int = 1):
    """Laplace transform of interference from field-UAV group ``m``."""
    u, l = _as_arrays(u, rule)
    net = build_network(params, mh)
    g = net.groups[m - 1]
    E = np.asarray(np.broadcast_to(rule.threshold(TierRef.field(m)), u.shape), dtype=float)
    return _ret(u, np.exp(-_uav_exponent(g.params, g.power, u, E, tol.inner())))


# -- ground BSs ---------------------------------------------------------------

def _bs_tail_integral(z0, alpha):
    """int_{z0}^inf z / (1 + z^alpha) dz in closed form."""
    z0 = np.asarray(z0, dtype=float)
    delta = 2.0 / alpha
    full = (np.pi / alpha) / np.sin(np.pi * delta)
    out = np.empty_like(z0)
    small = z0 < 1.0
    zs = z0[small]
    out[small] = full - 0.5 * zs * zs * hyp2f1(1.0, delta, 1.0 + delta, -zs ** alpha)
    zl = z0[~small]
    out[~small] = zl ** (2.0 - alpha) / (alpha - 2.0) * hyp2f1(1.0, 1.0 - delta, 2.0 - delta, -zl ** (-alpha))
    return out


def _bs_exponent(params: SystemParams, power, u, E):
    T = u * power
    out = np.zeros_like(u)
    live = T > 0
    if params.lambda_b == 0.0 or not np.any(live):
        return out
    rho_T = (T[live] / params.eta_b) ** (1.0 / params.alpha_b)
    rho_0 = np.asarray(pl.bs_distance(E[live], params))
    out[live] = 2.0 * np.pi * params.lambda_b * rho_T ** 2 * _bs_tail_integral(rho_0 / rho_T, params.alpha_b)
    return out


def laplace_i2(u, rule: ExclusionRule, params: SystemParams, mh: MultiHeightParams | None = None):
    """Laplace transform of ground-BS interference (closed form)."""
    u, l = _as_arrays(u, rule)
    net = build_network(params, mh)
    E = np.asarray(np.broadcast_to(rule.threshold(TierRef.bs()), u.shape), dtype=float)
    return _ret(u, np.exp(-_bs_exponent(params, net.bs_power, u, E)))


# -- assembly -------------------------------------------------------------------

def sinr_factor(net: Network, ev: Event, l, thresholds, tol: Tolerance, normalization: str):
    """Conditional coverage given association with ``ev`` at path loss ``l``."""
    k = net.tier_index(ev.tier)
    pk, _ = net.power_bias(ev.tier)
    gamma = thresholds[k]
    noise = net.params.noise[k]
    u = gamma * l / pk
    rule = _rule(net, ev.tier, l)
    inner = tol.inner()
    out = np.exp(-u * noise)
    if ev.tier.kind is not TierKind.CENTER_UAV:
        out = out * _center_laplace(net, u, rule.threshold(TierRef.center()), inner, normalization)
    exponent = np.zeros_like(u)
    for g in net.groups:
        exponent += _uav_exponent(g.params, g.power, u, rule.threshold(TierRef.field(g.m)), inner)
    exponent += _bs_exponent(net.params, net.bs_power, u, rule.threshold(TierRef.bs()))
    return out * np.exp(-exponent)


def params_fingerprint(params: SystemParams, mh: MultiHeightParams | None = None, **options) -> str:
    blob = {"params": asdict(params), "mh": asdict(mh) if mh else None, "options": options}
    return hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CoverageReport:
    """Coverage of one parameter point.

    ``per_event[name]`` is P(covered and served by that event); the names
    follow :class:`~uavcov.association.AssociationProfile`.  ``total`` is
    their sum.  ``ase`` is filled when all tiers share one threshold.
    """

    per_event: dict
    per_event_err: dict
    association: AssociationProfile
    thresholds: tuple
    total: float
    total_err: float
    ase: float | None
    params_hash: str
    density_uav: float = 0.0
    density_bs: float = 0.0
    extras: dict = field(default_factory=dict)

    def tier_terms(self):
        """Coverage terms summed over link states: (center, field UAVs, BSs)."""
        bs = self.association.bs_key
        t0 = sum(v for k, v in self.per_event.items() if k.startswith("0_"))
        t2 = self.per_event[bs]
        return t0, self.total - t0 - t2, t2

    def conditional(self, name):
        a = self.association.probs[name]
        return self.per_event[name] / a if a > 0 else float("nan")


def evaluate_network(net: Network, thresholds, tol: Tolerance, normalization: str) -> CoverageReport:
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    thresholds = tuple(float(g) for g in thresholds)
    if len(thresholds) != 3 or any(not g > 0 for g in thresholds):
        raise ValueError("need three positive SINR thresholds")
    assoc = profile_for(net, tol)
    per_event = {}
    per_err = {}
    # center, groups, BS and the noise term each contribute an inner error.
    n_factors = net.M + 3
    for ev in net.events():
        name = net.event_name(ev)
        res = event_integral(
            net, ev, tol, factor=lambda l, ev=ev: sinr_factor(net, ev, l, thresholds, tol, normalization)
        ).require(f"coverage term P{name}")
        per_event[name] = res.value
        per_err[name] = res.err_estimate + n_factors * tol.inner().rel * abs(res.value)
    total = sum(per_event.values())
    lam_u = sum(g.params.lambda_u for g in net.groups)
    ase = None
    if len(set(thresholds)) == 1:
        ase = _ase_from_terms(per_event, assoc.bs_key, lam_u, net.params.lambda_b, thresholds[0])
    return CoverageReport(
        per_event=per_event,
        per_event_err=per_err,
        association=assoc,
        thresholds=thresholds,
        total=total,
        total_err=sum(per_err.values()),
        ase=ase,
        params_hash=params_fingerprint(net.params, net.multiheight, normalization=normalization,
                                       center_ccdf=net.center_ccdf, thresholds=thresholds),
        density_uav=lam_u,
        density_bs=net.params.lambda_b,
    )


def _ase_from_terms(per_event, bs_key, lam_u, lam_b, gamma):
    uav = sum(v for k, v in per_event.items() if k != bs_key)
    return (lam_u * uav + lam_b * per_event[bs_key]) * math.log2(1.0 + gamma)


def total_coverage(params: SystemParams, thresholds=None, tol: Tolerance = DEFAULT_TOL,
                   normalization: str = "conditioned", center_ccdf: str = "exact") -> CoverageReport:
    """Total SINR coverage of the single-height network.

    ``thresholds`` are the linear per-tier thresholds (center, field, BS);
    defaults to ``params.sinr_threshold``.
    """
    net = build_network(params, None, center_ccdf)
    return evaluate_network(net, thresholds or params.sinr_threshold, tol, normalization)


def total_coverage_multiheight(params: SystemParams, mh: MultiHeightParams, thresholds=None,
                               tol: Tolerance = DEFAULT_TOL, normalization: str = "conditioned",
                               center_ccdf: str = "exact") -> CoverageReport:
    """Coverage of a UE clustered around a UAV of group ``mh.anchor_tier``.

    Field-UAV groups use ``thresholds[1]`` and ``params.noise[1]``; the BS
    tier uses index 2.
    """
    net = build_network(params, mh, center_ccdf)
    return evaluate_network(net, thresholds or params.sinr_threshold, tol, normalization)


def ase(params: SystemParams, common_threshold: float, tol: Tolerance = DEFAULT_TOL,
        normalization: str = "conditioned", center_ccdf: str = "exact") -> float:
    """Area spectral efficiency in bit/s/Hz/m^2 with one threshold for all tiers."""
    if not common_threshold > 0:
        raise ValueError("threshold must be positive")
    rep = total_coverage(params, (common_threshold,) * 3, tol, normalization, center_ccdf)
    return rep.ase
