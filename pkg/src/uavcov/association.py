"""Association probabilities under max average biased-received-power.

The typical UE picks the node maximising ``P_k B_k / L``.  For each
association event (serving tier and, for UAVs, link state) the probability
is an integral over the serving path loss ``l`` of the serving node's
density times the probability that every competitor is weaker:

* the center UAV:  ``Fbar_L0(P0 B0 / (Pk Bk) * l)``,
* each field-UAV group j:  ``exp(-Lambda_j(Pj Bj / (Pk Bk) * l))``,
* ground BSs:  ``exp(-Lambda_B(PB BB / (Pk Bk) * l))``.

Integrals are evaluated in the serving node's horizontal distance rather
than in ``l``; the two are related by a monotone change of variables and the
distance form keeps the integrands smooth and free of endpoint singularities.

The same event integrals, multiplied by an SINR factor, give the coverage
terms (see :mod:`uavcov.coverage`), so the tier bookkeeping lives here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import pathloss as pl
from .model import (
    LinkState,
    MultiHeightParams,
    SystemParams,
    TierKind,
    TierRef,
    validate,
    validate_multiheight,
)
from .quadrature import DEFAULT_TOL, Tolerance, integrate_semi_infinite

CENTER_CCDF_FORMS = ("exact", "closed_form")
_CENTER_QUANTILES = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 7.0)


@dataclass(frozen=True)
class UavGroup:
    """A field-UAV group; ``params`` carries its height and density."""

    m: int
    params: SystemParams
    power: float
    bias: float


@dataclass(frozen=True)
class Network:
    """Flattened tier description shared by association and coverage.

    ``center`` carries the anchor height; ``groups`` the field-UAV groups;
    the BS tier is described by ``params`` (lambda_b, eta_b, alpha_b) with
    ``bs_power``/``bs_bias``.
    """

    params: SystemParams
    center: SystemParams
    center_power: float
    center_bias: float
    groups: tuple
    bs_power: float
    bs_bias: float
    center_ccdf: str = "exact"
    multiheight: MultiHeightParams | None = None

    @property
    def M(self):
        return len(self.groups)

    def power_bias(self, tier: TierRef):
        if tier.kind is TierKind.CENTER_UAV:
            return self.center_power, self.center_bias
        if tier.kind is TierKind.GROUND_BS:
            return self.bs_power, self.bs_bias
        g = self.groups[tier.m - 1]
        return g.power, g.bias

    def tier_index(self, tier: TierRef) -> int:
        """Index into the per-tier noise / threshold tuples (0, 1 or 2)."""
        return int(tier.kind)

    def events(self):
        out = [Event(TierRef.center(), s) for s in pl.STATES]
        for g in self.groups:
            out += [Event(TierRef.field(g.m), s) for s in pl.STATES]
        out.append(Event(TierRef.bs(), None))
        return out

    def event_name(self, ev: "Event") -> str:
        if ev.tier.kind is TierKind.GROUND_BS:
            return str(self.M + 1)
        k = 0 if ev.tier.kind is TierKind.CENTER_UAV else ev.tier.m
        return f"{k}_{ev.state.value}"

    def center_ccdf_fn(self, x):
        if self.center_ccdf == "closed_form":
            return pl.ccdf_l0(x, self.center)
        return pl.ccdf_l0_exact(x, self.center)


@dataclass(frozen=True)
class Event:
    tier: TierRef
    state: LinkState | None = None


def build_network(params: SystemParams, mh: MultiHeightParams | None = None,
                  center_ccdf: str = "exact") -> Network:
    validate(params)
    if center_ccdf not in CENTER_CCDF_FORMS:
        raise ValueError(f"center_ccdf must be one of {CENTER_CCDF_FORMS}, got {center_ccdf!r}")
    if mh is None:
        groups = (UavGroup(1, params, params.p_tx[1], params.bias[1]),)
        center = params
    else:
        validate_multiheight(mh, params)
        groups = tuple(
            UavGroup(m + 1, replace(params, height=h, lambda_u=lam), p, b)
            for m, (h, lam, p, b) in enumerate(zip(mh.heights, mh.lambda_m, mh.p_tx_m, mh.bias_m))
        )
        center = replace(params, height=mh.heights[mh.anchor_tier - 1])
    return Network(
        params=params,
        center=center,
        center_power=params.p_tx[0],
        center_bias=params.bias[0],
        groups=groups,
        bs_power=params.p_tx[2],
        bs_bias=params.bias[2],
        center_ccdf=center_ccdf,
        multiheight=mh,
    )


def serving_geometry(net: Network, ev: Event, r):
    """Serving path loss and density weight (per unit horizontal distance)."""
    r = np.asarray(r, dtype=float)
    kind = ev.tier.kind
    if kind is TierKind.CENTER_UAV:
        p = net.center
        l = pl.pathloss_uav(r, ev.state, p)
        w = np.asarray(pl.p_state(r, ev.state, p)) * pl.cluster_pdf(r, p.sigma_c)
    elif kind is TierKind.FIELD_UAV:
        g = net.groups[ev.tier.m - 1]
        l = pl.pathloss_uav(r, ev.state, g.params)
        w = 2.0 * np.pi * g.params.lambda_u * np.asarray(pl.p_state(r, ev.state, g.params)) * r
    else:
        l = pl.pathloss_bs(r, net.params)
        w = 2.0 * np.pi * net.params.lambda_b * r
    return np.asarray(l, dtype=float), np.asarray(w, dtype=float)


def exclusion_thresholds(net: Network, tier: TierRef, l):
    """Path-loss thresholds below which no node of each tier may lie.

    Returns ``{TierRef: threshold}``; the center entry is omitted when the
    center UAV is the serving node.
    """
    pk, bk = net.power_bias(tier)
    out = {}
    if tier.kind is not TierKind.CENTER_UAV:
        out[TierRef.center()] = net.center_power * net.center_bias / (pk * bk) * l
    for g in net.groups:
        out[TierRef.field(g.m)] = g.power * g.bias / (pk * bk) * l
    out[TierRef.bs()] = net.bs_power * net.bs_bias / (pk * bk) * l
    return out


def competitor_void(net: Network, tier: TierRef, l):
    """Probability that every other node has lower biased received power."""
    l = np.asarray(l, dtype=float)
    thresholds = exclusion_thresholds(net, tier, l)
    lam = np.zeros_like(l)
    for g in net.groups:
        lam = lam + pl.intensity_l1_total(thresholds[TierRef.field(g.m)], g.params)
    lam = lam + pl.intensity_l2(thresholds[TierRef.bs()], net.params)
    out = np.exp(-lam)
    if tier.kind is not TierKind.CENTER_UAV:
        out = out * np.asarray(net.center_ccdf_fn(thresholds[TierRef.center()]))
    return out


def _kinks(net: Network, ev: Event):
    """Serving distances where a competitor's support edge is crossed."""
    pk, bk = net.power_bias(ev.tier)
    supports = []
    if ev.tier.kind is not TierKind.CENTER_UAV:
        # The center-UAV void falls off on the scale of sigma_c, which can be
        # far narrower than the serving tier's own scale.
        for s in pl.STATES:
            for q in _CENTER_QUANTILES:
                d = q * net.center.sigma_c
                supports.append((pl.pathloss_uav(d, s, net.center), net.center_power * net.center_bias))
    for g in net.groups:
        for s in pl.STATES:
            supports.append((pl.support_min(s, g.params), g.power * g.bias))
    points = []
    for x_edge, pb in supports:
        l_edge = x_edge * pk * bk / pb
        if ev.tier.kind is TierKind.GROUND_BS:
            r = pl.bs_distance(l_edge, net.params)
        else:
            p = net.center if ev.tier.kind is TierKind.CENTER_UAV else net.groups[ev.tier.m - 1].params
            r = pl.horizontal_distance(l_edge, ev.state, p)
        if r > 0:
            points.append(float(r))
    return sorted(set(points))


def _scale(net: Network, ev: Event) -> float:
    if ev.tier.kind is TierKind.FIELD_UAV:
        return max(net.groups[ev.tier.m - 1].params.height, net.center.sigma_c)
    return max(net.center.sigma_c, net.center.height)


def event_density(net: Network, ev: Event) -> float:
    """Density of the serving process (0 makes the event impossible)."""
    if ev.tier.kind is TierKind.FIELD_UAV:
        return net.groups[ev.tier.m - 1].params.lambda_u
    if ev.tier.kind is TierKind.GROUND_BS:
        return net.params.lambda_b
    return 1.0


def event_integral(net: Network, ev: Event, tol: Tolerance = DEFAULT_TOL, factor=None):
    """Integrate density x competitor-void (x ``factor(l)``) over the event.

    ``factor`` receives the array of serving path losses.  Returns an
    :class:`~uavcov.quadrature.IntegrationResult`.
    """
    if event_density(net, ev) == 0.0:
        from .quadrature import IntegrationResult
        return IntegrationResult(0.0, 0.0, 0, True)

    def integrand(r):
        l, w = serving_geometry(net, ev, r)
        val = w * competitor_void(net, ev.tier, l)
        if factor is not None:
            live = val > 0
            if np.any(live):
                out = np.zeros_like(val)
                out[live] = val[live] * factor(l[live])
                val = out
        return val

    return integrate_semi_infinite(integrand, 0.0, tol, scale=_scale(net, ev), points=_kinks(net, ev))


@dataclass(frozen=True)
class AssociationProfile:
    """Association probability of every event, keyed ``"0_los"``,
    ``"0_nlos"``, ``"1_los"``, ``"1_nlos"`` (more groups in multi-height
    mode) and the BS tier ``str(M + 1)``."""

    probs: dict
    errors: dict = field(default_factory=dict)

    @property
    def bs_key(self):
        return max(self.probs, key=lambda k: (k.isdigit(), len(k), k))

    @property
    def a0_los(self):
        return self.probs["0_los"]

    @property
    def a0_nlos(self):
        return self.probs["0_nlos"]

    @property
    def a1_los(self):
        return self.probs["1_los"]

    @property
    def a1_nlos(self):
        return self.probs["1_nlos"]

    @property
    def a2(self):
        return self.probs[self.bs_key]

    @property
    def a0(self):
        return self.a0_los + self.a0_nlos

    @property
    def a1(self):
        return sum(v for k, v in self.probs.items() if not k.startswith("0_") and k != self.bs_key)

    @property
    def total(self):
        return sum(self.probs.values())

    @property
    def residual(self):
        return 1.0 - self.total


def _assoc(net, ev, tol, context):
    return event_integral(net, ev, tol).require(context)


def assoc_prob_0(state, params: SystemParams, tol: Tolerance = DEFAULT_TOL, center_ccdf="exact",
                 mh: MultiHeightParams | None = None) -> float:
    """Probability the typical UE is served by its cluster-center UAV in ``state``."""
    state = LinkState.coerce(state)
    net = build_network(params, mh, center_ccdf)
    return _assoc(net, Event(TierRef.center(), state), tol, f"A0,{state.value}").value


def assoc_prob_1(state, params: SystemParams, tol: Tolerance = DEFAULT_TOL, center_ccdf="exact",
                 mh: MultiHeightParams | None = None, m: int = 1) -> float:
    state = LinkState.coerce(state)
    net = build_network(params, mh, center_ccdf)
    return _assoc(net, Event(TierRef.field(m), state), tol, f"A{m},{state.value}").value


def assoc_prob_2(params: SystemParams, tol: Tolerance = DEFAULT_TOL, center_ccdf="exact",
                 mh: MultiHeightParams | None = None) -> float:
    net = build_network(params, mh, center_ccdf)
    return _assoc(net, Event(TierRef.bs()), tol, "A2").value


def assoc_profile(params: SystemParams, tol: Tolerance = DEFAULT_TOL, center_ccdf="exact",
                  mh: MultiHeightParams | None = None) -> AssociationProfile:
    net = build_network(params, mh, center_ccdf)
    return profile_for(net, tol)


def profile_for(net: Network, tol: Tolerance = DEFAULT_TOL) -> AssociationProfile:
    probs = {}
    errors = {}
    for ev in net.events():
        name = net.event_name(ev)
        res = _assoc(net, ev, tol, f"A{name}")
        probs[name] = res.value
        errors[name] = res.err_estimate
    return AssociationProfile(probs, errors)
