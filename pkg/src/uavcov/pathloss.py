"""Path-loss laws and the distributions they induce at the typical UE.

Notation used throughout: ``x`` is a path loss (linear), ``r`` a horizontal
distance in metres.  For a UAV link in state ``s`` the two are related by
``x = eta_s (r^2 + H^2)^(alpha_s/2)``; :func:`horizontal_distance` inverts
that, clamping to 0 below the minimum path loss ``eta_s H^alpha_s`` so every
formula extends continuously below its support.

All functions accept scalars or numpy arrays and are pure functions of
``(x, params)``.  Multi-height callers pass a copy of ``params`` whose
``height``/``lambda_u`` describe the UAV group in question.
"""

from __future__ import annotations

import functools

import numpy as np

from .model import LinkState, SystemParams

LOS = LinkState.LOS
NLOS = LinkState.NLOS
STATES = (LOS, NLOS)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _ret(x, value):
    return float(value) if np.ndim(x) == 0 else value


def p_los(r, params: SystemParams):
    """LOS probability at horizontal distance ``r`` (elevation-angle sigmoid)."""
    r = np.asarray(r, dtype=float)
    elevation = np.degrees(np.arctan2(params.height, r))
    val = 1.0 / (1.0 + params.env_b * np.exp(-params.env_c * (elevation - params.env_b)))
    return _ret(r, val)


def p_nlos(r, params: SystemParams):
    return _ret(r, 1.0 - np.asarray(p_los(r, params)))


def p_state(r, state: LinkState, params: SystemParams):
    return p_los(r, params) if state is LOS else p_nlos(r, params)


def pathloss_uav(r, state: LinkState, params: SystemParams):
    r = np.asarray(r, dtype=float)
    val = params.eta(state) * (r * r + params.height ** 2) ** (params.alpha(state) / 2.0)
    return _ret(r, val)


def pathloss_bs(r, params: SystemParams):
    r = np.asarray(r, dtype=float)
    return _ret(r, params.eta_b * r ** params.alpha_b)


def support_min(state: LinkState, params: SystemParams) -> float:
    """Smallest possible UAV path loss in ``state`` (UAV directly overhead)."""
    return params.eta(state) * params.height ** params.alpha(state)


def horizontal_distance_sq(x, state: LinkState, params: SystemParams):
    x = np.asarray(x, dtype=float)
    val = np.maximum(0.0, (x / params.eta(state)) ** (2.0 / params.alpha(state)) - params.height ** 2)
    return _ret(x, val)


def horizontal_distance(x, state: LinkState, params: SystemParams):
    """Horizontal distance at which a UAV link in ``state`` has path loss ``x``."""
    return _ret(x, np.sqrt(horizontal_distance_sq(x, state, params)))


def bs_distance(x, params: SystemParams):
    x = np.asarray(x, dtype=float)
    return _ret(x, (np.maximum(x, 0.0) / params.eta_b) ** (1.0 / params.alpha_b))


class PanelTable:
    """Running integral of a smooth function over a fixed knot grid.

    Whole panels are integrated once with 16-point Gauss-Legendre; a query
    adds the partial panel it lands in with the same rule, so values are
    exact to rounding rather than interpolated.  With ``from_right`` the
    table holds tail integrals ``int_R^knots[-1] g``.
    """

    def __init__(self, g, knots, from_right=False):
        self.g = g
        self.knots = np.asarray(knots, dtype=float)
        self.from_right = from_right
        panels = self._gl(self.knots[:-1], self.knots[1:])
        if from_right:
            self.cum = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
        else:
            self.cum = np.concatenate([[0.0], np.cumsum(panels)])

    def _gl(self, a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        x = mid[:, None] + half[:, None] * _GL_X[None, :]
        return half * (self.g(x) @ _GL_W)

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        flat = np.clip(R.ravel(), self.knots[0], self.knots[-1])
        i = np.clip(np.searchsorted(self.knots, flat, side="right") - 1, 0, len(self.knots) - 2)
        if self.from_right:
            out = self.cum[i + 1] + self._gl(flat, self.knots[i + 1])
        else:
            out = self.cum[i] + self._gl(self.knots[i], flat)
        return out.reshape(R.shape)


_TABLE_SPAN = 1e6  # disc tables reach this many heights


@functools.lru_cache(maxsize=256)
def _disc_table(height, env_b, env_c, state):
    """Table of int_0^R P_s(r) r dr, which depends only on (H, b, c)."""
    p = SystemParams(height=height, env_b=env_b, env_c=env_c)
    knots = np.concatenate([[0.0], height * np.logspace(-3, np.log10(_TABLE_SPAN), 1200)])
    table = PanelTable(lambda r: p_state(r, state, p) * r, knots)
    # Beyond the table P_s is linear in the elevation angle, ~ (180/pi) H / r.
    p0 = 1.0 / (1.0 + env_b * np.exp(env_b * env_c))
    slope = p0 * (1.0 - p0) * env_c * 180.0 / np.pi * height
    if state is NLOS:
        p0, slope = 1.0 - p0, -slope
    return table, p0, slope


def disc_integral(R, state: LinkState, params: SystemParams):
    """``int_0^R P_s(r) r dr``."""
    R = np.asarray(R, dtype=float)
    table, p0, slope = _disc_table(params.height, params.env_b, params.env_c, state)
    r_max = table.knots[-1]
    out = table(R)
    far = R > r_max
    if np.any(far):
        Rf = np.where(far, R, r_max)
        out = np.where(far, out + 0.5 * p0 * (Rf ** 2 - r_max ** 2) + slope * (Rf - r_max), out)
    return _ret(R, out)


@functools.lru_cache(maxsize=256)
def _center_table(height, sigma_c, env_b, env_c, state):
    """Table of int_R^inf P_s(d) f_D(d) dd for the Rayleigh cluster offset."""
    p = SystemParams(height=height, sigma_c=sigma_c, env_b=env_b, env_c=env_c)
    r_max = 40.0 * sigma_c
    knots = np.concatenate([
        sigma_c * np.linspace(0.0, 40.0, 1201),
        height * np.logspace(-3, np.log10(max(r_max / height, 1e-2)), 400),
    ])
    knots = np.unique(knots[knots <= r_max])

    def g(d):
        return p_state(d, state, p) * cluster_pdf(d, sigma_c)

    return PanelTable(g, knots, from_right=True)


def cluster_pdf(d, sigma_c):
    """Rayleigh density of the UE-to-cluster-center horizontal distance."""
    d = np.asarray(d, dtype=float)
    s2 = sigma_c * sigma_c
    return _ret(d, d / s2 * np.exp(-d * d / (2.0 * s2)))


def cluster_ccdf(d, sigma_c):
    d = np.asarray(d, dtype=float)
    return _ret(d, np.exp(-d * d / (2.0 * sigma_c * sigma_c)))


def center_state_tail(R, state: LinkState, params: SystemParams):
    """P(center UAV in ``state`` and at horizontal distance >= R)."""
    table = _center_table(params.height, params.sigma_c, params.env_b, params.env_c, state)
    R = np.asarray(R, dtype=float)
    return _ret(R, table(R))


def ccdf_l0_state(x, state: LinkState, params: SystemParams):
    """State-``s`` factor exp(-r_s(x)^2 / 2 sigma_c^2); equals 1 below support."""
    r2 = horizontal_distance_sq(x, state, params)
    return _ret(x, np.exp(-np.asarray(r2) / (2.0 * params.sigma_c ** 2)))


def ccdf_l0(x, params: SystemParams):
    """Center-UAV path-loss CCDF in the closed form sum_s P_s(r_s(x)) F_D(r_s(x)).

    This weights each state by its LOS probability at the boundary distance
    r_s(x) only.  It is a convenient closed form but not the marginal CCDF of
    the path loss (see :func:`ccdf_l0_exact`); the association probabilities
    only partition unity when the exact form is used.
    """
    out = 0.0
    for s in STATES:
        out = out + np.asarray(p_state(horizontal_distance(x, s, params), s, params)) * ccdf_l0_state(x, s, params)
    return _ret(x, out)


def ccdf_l0_exact(x, params: SystemParams):
    """P(L_0 >= x) with the link state drawn at the UE's actual distance."""
    out = 0.0
    for s in STATES:
        out = out + np.asarray(center_state_tail(horizontal_distance(x, s, params), s, params))
    return _ret(x, out)


def pdf_l0(x, state: LinkState, params: SystemParams):
    """Density of the center-UAV path loss given the link is in ``state``."""
    x = np.asarray(x, dtype=float)
    a = params.alpha(state)
    eta = params.eta(state)
    s2 = params.sigma_c ** 2
    lo = support_min(state, params)
    inside = x >= lo
    xs = np.where(inside, x, lo)
    val = (xs ** (2.0 / a - 1.0) / (a * eta ** (2.0 / a)) / s2
           * np.exp(-((xs / eta) ** (2.0 / a) - params.height ** 2) / (2.0 * s2)))
    return _ret(x, np.where(inside, val, 0.0))


def intensity_l1(x, state: LinkState, params: SystemParams):
    """Expected number of field UAVs in ``state`` with path loss below ``x``."""
    r = horizontal_distance(x, state, params)
    return _ret(x, 2.0 * np.pi * params.lambda_u * np.asarray(disc_integral(r, state, params)))


def intensity_l1_total(x, params: SystemParams):
    return _ret(x, np.asarray(intensity_l1(x, LOS, params)) + np.asarray(intensity_l1(x, NLOS, params)))


def intensity_l2(x, params: SystemParams):
    x = np.asarray(x, dtype=float)
    return _ret(x, np.pi * params.lambda_b * (np.maximum(x, 0.0) / params.eta_b) ** (2.0 / params.alpha_b))


def intensity_density_l1(x, state: LinkState, params: SystemParams):
    """Derivative of :func:`intensity_l1` in ``x``; zero below support."""
    x = np.asarray(x, dtype=float)
    a = params.alpha(state)
    eta = params.eta(state)
    inside = x > support_min(state, params)
    xs = np.where(inside, x, 1.0)
    r = horizontal_distance(xs, state, params)
    val = (2.0 * np.pi * params.lambda_u * xs ** (2.0 / a - 1.0) / (a * eta ** (2.0 / a))
           * np.asarray(p_state(r, state, params)))
    return _ret(x, np.where(inside, val, 0.0))


def intensity_density_l2(x, params: SystemParams):
    x = np.asarray(x, dtype=float)
    a = params.alpha_b
    xs = np.where(x > 0, x, 1.0)
    val = 2.0 * np.pi * params.lambda_b * xs ** (2.0 / a - 1.0) / (a * params.eta_b ** (2.0 / a))
    return _ret(x, np.where(x > 0, val, 0.0))


def ccdf_l1(x, params: SystemParams, state: LinkState | None = None):
    """Void probability of field UAVs (one state, or both) below path loss ``x``."""
    lam = intensity_l1_total(x, params) if state is None else intensity_l1(x, state, params)
    return _ret(x, np.exp(-np.asarray(lam)))


def ccdf_l2(x, params: SystemParams):
    return _ret(x, np.exp(-np.asarray(intensity_l2(x, params))))
