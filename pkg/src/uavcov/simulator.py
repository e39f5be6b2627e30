"""Monte Carlo network simulator used as an independent oracle.

The typical UE sits at the origin.  Each realization draws

* the cluster-center UAV at a Rayleigh(sigma_c) horizontal offset,
* field UAVs as a PPP of density lambda_u on the disc of radius
  ``window_radius`` (split into height groups by independent marks),
* ground BSs as a PPP of density lambda_b on the same disc,

with an independent LOS/NLOS draw per UAV link and unit-mean exponential
fading on every link.  It then applies max biased-received-power
association and computes the SINR directly.  No analytic result is reused.

Reproducibility: realization ``i`` uses counter-based Philox streams keyed
by ``seed`` whose counters start at ``(stream=i, substream)``.  Results are
therefore a pure function of ``(params, SimConfig)`` regardless of chunking
or worker count.  Points of each PPP are generated in increasing distance
from the UE (cumulative exponential "arrival" areas), so enlarging the
window keeps every point of the smaller window and only appends the outer
annulus.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .model import LinkState, MultiHeightParams, SystemParams, validate, validate_multiheight

_BLOCK = 1024
_SUB_CENTER, _SUB_UAV, _SUB_BS = 0, 1, 2
_MASK64 = (1 << 64) - 1


def default_window(params: SystemParams, mh: MultiHeightParams | None = None) -> float:
    dens = [d for d in (params.lambda_u, params.lambda_b) if d > 0]
    if mh is not None:
        dens += [d for d in mh.lambda_m if d > 0]
    return max(5000.0, 10.0 / math.sqrt(min(dens))) if dens else 5000.0


@dataclass(frozen=True)
class SimConfig:
    window_radius: float | None = None
    n_realizations: int = 100_000
    seed: int = 0
    ci_level: float = 0.95
    mh: MultiHeightParams | None = None
    exact_ci: bool = False
    workers: int = 1
    chunk: int = 2000

    def __post_init__(self):
        if self.window_radius is not None and not self.window_radius > 0:
            raise ValueError("window_radius must be positive")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not 0 < self.ci_level < 1:
            raise ValueError("ci_level must be in (0, 1)")

    def window(self, params: SystemParams) -> float:
        return self.window_radius or default_window(params, self.mh)


def _stream(seed, index, sub):
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, sub, index]))


@dataclass
class Realization:
    """One network snapshot around the typical UE at the origin.

    UAV arrays are ordered by increasing horizontal distance.  ``uav_group``
    is the 1-based height group; ``*_fading`` are the power gains of the
    links to the typical UE.
    """

    center_offset: np.ndarray
    center_height: float
    center_los: bool
    center_fading: float
    uav_r: np.ndarray
    uav_angle: np.ndarray
    uav_height: np.ndarray
    uav_group: np.ndarray
    uav_los: np.ndarray
    uav_fading: np.ndarray
    bs_r: np.ndarray
    bs_angle: np.ndarray
    bs_fading: np.ndarray
    window_radius: float
    stream: int

    @property
    def uav_xy(self):
        return np.column_stack([self.uav_r * np.cos(self.uav_angle), self.uav_r * np.sin(self.uav_angle)])

    @property
    def bs_xy(self):
        return np.column_stack([self.bs_r * np.cos(self.bs_angle), self.bs_r * np.sin(self.bs_angle)])


def _los_prob(r, h, params):
    elevation = np.degrees(np.arctan2(h, r))
    return 1.0 / (1.0 + params.env_b * np.exp(-params.env_c * (elevation - params.env_b)))


def _radial_ppp(gen, density, radius, n_marks):
    """PPP on a disc, sorted by distance, with ``n_marks`` uniform marks each."""
    if density <= 0:
        return np.empty(0), np.empty((n_marks, 0))
    target = density * math.pi * radius * radius
    radii, marks = [], []
    area = 0.0
    while True:
        cum = area + np.cumsum(gen.standard_exponential(_BLOCK))
        u = gen.random((n_marks, _BLOCK))
        k = int(np.searchsorted(cum, target, side="right"))
        radii.append(np.sqrt(cum[:k] / (density * math.pi)))
        marks.append(u[:, :k])
        if k < _BLOCK:
            break
        area = cum[-1]
    return np.concatenate(radii), np.concatenate(marks, axis=1)


def _groups(params: SystemParams, mh: MultiHeightParams | None):
    if mh is None:
        return np.array([params.height]), np.array([1.0]), np.array([params.p_tx[1]]), np.array([params.bias[1]]), 1
    lam = np.asarray(mh.lambda_m)
    frac = lam / lam.sum() if lam.sum() > 0 else np.full(mh.M, 1.0 / mh.M)
    return (np.asarray(mh.heights), frac, np.asarray(mh.p_tx_m), np.asarray(mh.bias_m), mh.anchor_tier)


def sample_realization(params: SystemParams, sim: SimConfig, stream: int, checked: bool = False) -> Realization:
    mh = sim.mh
    if not checked:
        validate(params)
        if mh is not None:
            validate_multiheight(mh, params)
    R = sim.window(params)
    heights, frac, _, _, anchor = _groups(params, mh)

    g = _stream(sim.seed, stream, _SUB_CENTER)
    d = params.sigma_c * math.sqrt(-2.0 * math.log1p(-g.random()))
    phi = 2.0 * math.pi * g.random()
    h0 = float(heights[anchor - 1])
    center_los = bool(g.random() < _los_prob(d, h0, params))
    center_fading = float(g.standard_exponential())

    g = _stream(sim.seed, stream, _SUB_UAV)
    r, m = _radial_ppp(g, params.lambda_u, R, 4)
    ang = 2.0 * math.pi * m[0]
    group = np.searchsorted(np.cumsum(frac), m[3], side="right").clip(0, len(frac) - 1) + 1
    h = heights[group - 1]
    los = m[1] < _los_prob(r, h, params)
    uav_fading = -np.log1p(-m[2])

    g = _stream(sim.seed, stream, _SUB_BS)
    rb, mb = _radial_ppp(g, params.lambda_b, R, 2)
    angb = 2.0 * math.pi * mb[0]

    return Realization(
        center_offset=np.array([d * math.cos(phi), d * math.sin(phi)]),
        center_height=h0,
        center_los=center_los,
        center_fading=center_fading,
        uav_r=r,
        uav_angle=ang,
        uav_height=h,
        uav_group=group,
        uav_los=los,
        uav_fading=uav_fading,
        bs_r=rb,
        bs_angle=angb,
        bs_fading=-np.log1p(-mb[1]),
        window_radius=R,
        stream=stream,
    )


def _uav_pathloss(r, h, los, params):
    d2 = r * r + h * h
    return np.where(los, params.eta_los * d2 ** (params.alpha_los / 2.0),
                    params.eta_nlos * d2 ** (params.alpha_nlos / 2.0))


@dataclass(frozen=True)
class Outcome:
    """Association event code, SINR and interference split of one realization.

    Event codes: ``0``/``1`` center UAV LOS/NLOS, ``2m``/``2m+1`` field group
    m LOS/NLOS, ``2M+2`` ground BS.  ``interference`` holds (center, field
    UAVs, BSs) received powers excluding the server.
    """

    event: int
    sinr: float
    serving_pathloss: float
    interference: tuple
    center_pathloss: float
    nearest_uav_pathloss: float


def evaluate_realization(real: Realization, params: SystemParams, mh: MultiHeightParams | None = None) -> Outcome:
    _, _, p_groups, b_groups, _ = _groups(params, mh)
    M = len(p_groups)
    d0 = float(np.hypot(*real.center_offset))
    L0 = float(_uav_pathloss(d0, real.center_height, real.center_los, params))
    Lu = _uav_pathloss(real.uav_r, real.uav_height, real.uav_los, params)
    Lb = params.eta_b * real.bs_r ** params.alpha_b

    pu = p_groups[real.uav_group - 1]
    bu = b_groups[real.uav_group - 1]
    p0, b0 = params.p_tx[0], params.bias[0]
    p2, b2 = params.p_tx[2], params.bias[2]

    # Candidates in tie-break order: center, field UAVs, BSs.
    biased = np.concatenate([[p0 * b0 / L0], pu * bu / Lu, np.full(Lb.size, p2 * b2) / Lb])
    k = int(np.argmax(biased))
    rx_center = p0 * real.center_fading / L0
    rx_uav = pu * real.uav_fading / Lu
    rx_bs = p2 * real.bs_fading / Lb
    i_center, i_uav, i_bs = rx_center, float(rx_uav.sum()), float(rx_bs.sum())
    if k == 0:
        signal, tier = rx_center, 0
        i_center = 0.0
        event = 0 if real.center_los else 1
        l_serv = L0
    elif k <= Lu.size:
        j = k - 1
        signal, tier = float(rx_uav[j]), 1
        i_uav -= signal
        event = 2 * int(real.uav_group[j]) + (0 if real.uav_los[j] else 1)
        l_serv = float(Lu[j])
    else:
        j = k - 1 - Lu.size
        signal, tier = float(rx_bs[j]), 2
        i_bs -= signal
        event = 2 * M + 2
        l_serv = float(Lb[j])
    sinr = signal / (params.noise[tier] + max(i_center + i_uav + i_bs, 0.0))
    return Outcome(
        event=event,
        sinr=sinr,
        serving_pathloss=l_serv,
        interference=(i_center, max(i_uav, 0.0), max(i_bs, 0.0)),
        center_pathloss=L0,
        nearest_uav_pathloss=float(Lu.min()) if Lu.size else math.inf,
    )


def event_names(M: int):
    names = ["0_los", "0_nlos"]
    for m in range(1, M + 1):
        names += [f"{m}_los", f"{m}_nlos"]
    names.append(str(M + 1))
    return names


def event_tier_index(M: int):
    """Per-event index into the per-tier threshold tuple."""
    return np.array([0, 0] + [1, 1] * M + [2])


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    stderr: float
    ci: tuple
    n: int
    seed: int


def bernoulli_estimate(successes, n, seed, ci_level=0.95, exact=False) -> SimEstimate:
    p = successes / n
    se = math.sqrt(p * (1.0 - p) / n)
    if exact:
        a = 1.0 - ci_level
        lo = 0.0 if successes == 0 else float(stats.beta.ppf(a / 2, successes, n - successes + 1))
        hi = 1.0 if successes == n else float(stats.beta.ppf(1 - a / 2, successes + 1, n - successes))
    else:
        z = float(stats.norm.ppf(0.5 + ci_level / 2.0))
        lo, hi = max(0.0, p - z * se), min(1.0, p + z * se)
    return SimEstimate(p, se, (min(lo, p), max(hi, p)), n, seed)


def mean_estimate(samples, seed, ci_level=0.95) -> SimEstimate:
    x = np.asarray(samples, dtype=float)
    n = x.size
    m = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    z = float(stats.norm.ppf(0.5 + ci_level / 2.0))
    return SimEstimate(m, se, (m - z * se, m + z * se), n, seed)


@dataclass
class SimRun:
    """Per-realization outcomes of one simulation, in realization order."""

    params: SystemParams
    sim: SimConfig
    event: np.ndarray
    sinr: np.ndarray
    serving_pathloss: np.ndarray
    center_pathloss: np.ndarray
    nearest_uav_pathloss: np.ndarray
    interference: np.ndarray
    M: int = 1
    names: list = field(default_factory=list)

    @property
    def n(self):
        return self.event.size

    def covered(self, thresholds):
        thr = np.asarray(thresholds, dtype=float)[event_tier_index(self.M)]
        return self.sinr > thr[self.event]

    def _est(self, mask):
        return bernoulli_estimate(int(np.count_nonzero(mask)), self.n, self.sim.seed,
                                  self.sim.ci_level, self.sim.exact_ci)

    def association(self) -> dict:
        return {name: self._est(self.event == code) for code, name in enumerate(self.names)}

    def coverage(self, thresholds):
        """(total, per-event joint) coverage estimates."""
        cov = self.covered(thresholds)
        per = {name: self._est(cov & (self.event == code)) for code, name in enumerate(self.names)}
        return self._est(cov), per

    def ase(self, gamma) -> SimEstimate:
        cov = self.covered((gamma,) * 3)
        lam_u = self.params.lambda_u
        weight = np.where(self.event == len(self.names) - 1, self.params.lambda_b, lam_u)
        y = cov * weight * math.log2(1.0 + gamma)
        return mean_estimate(y, self.sim.seed, self.sim.ci_level)


def _run_range(args):
    params, sim, start, stop = args
    n = stop - start
    event = np.empty(n, dtype=np.int64)
    cols = np.empty((n, 4))
    inter = np.empty((n, 3))
    for i in range(n):
        out = evaluate_realization(sample_realization(params, sim, start + i, checked=True), params, sim.mh)
        event[i] = out.event
        cols[i] = (out.sinr, out.serving_pathloss, out.center_pathloss, out.nearest_uav_pathloss)
        inter[i] = out.interference
    return event, cols, inter


def simulate(params: SystemParams, sim: SimConfig) -> SimRun:
    validate(params)
    if sim.mh is not None:
        validate_multiheight(sim.mh, params)
    M = sim.mh.M if sim.mh is not None else 1
    bounds = list(range(0, sim.n_realizations, sim.chunk)) + [sim.n_realizations]
    jobs = [(params, sim, a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    if sim.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=sim.workers) as pool:
            parts = list(pool.map(_run_range, jobs))
    else:
        parts = [_run_range(j) for j in jobs]
    event = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    inter = np.concatenate([p[2] for p in parts])
    return SimRun(params, sim, event, cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3], inter, M, event_names(M))


def estimate_coverage(params: SystemParams, sim: SimConfig, thresholds=None):
    """Fraction of realizations whose SINR exceeds the serving tier's threshold.

    Returns ``(total, per_event)``; ``per_event`` maps event names to joint
    (covered and served by that event) estimates.
    """
    run = simulate(params, sim)
    return run.coverage(thresholds or params.sinr_threshold)


def estimate_ase(params: SystemParams, sim: SimConfig, gamma: float) -> SimEstimate:
    return simulate(params, sim).ase(gamma)


def interference_laplace_mc(params: SystemParams, sim: SimConfig, tier: str, u: float, threshold: float,
                            n: int | None = None) -> SimEstimate:
    """Monte Carlo E[exp(-u I)] for field UAVs (``tier="uav"``) or BSs
    (``tier="bs"``) beyond the path-loss ``threshold``."""
    n = n or sim.n_realizations
    R = sim.window(params)
    vals = np.empty(n)
    for i in range(n):
        if tier == "uav":
            g = _stream(sim.seed, i, _SUB_UAV)
            r, m = _radial_ppp(g, params.lambda_u, R, 4)
            los = m[1] < _los_prob(r, params.height, params)
            L = _uav_pathloss(r, params.height, los, params)
            rx = params.p_tx[1] * -np.log1p(-m[2]) / L
        elif tier == "bs":
            g = _stream(sim.seed, i, _SUB_BS)
            r, m = _radial_ppp(g, params.lambda_b, R, 2)
            L = params.eta_b * r ** params.alpha_b
            rx = params.p_tx[2] * -np.log1p(-m[1]) / L
        else:
            raise ValueError("tier must be 'uav' or 'bs'")
        vals[i] = math.exp(-u * float(rx[L > threshold].sum()))
    return mean_estimate(vals, sim.seed, sim.ci_level)


DUMP_HEADER = ("tier", "x", "y", "height", "state", "pathloss")


def dump_realization(real: Realization, params: SystemParams, path):
    """Write one row per node of ``real`` (CSV, header ``DUMP_HEADER``)."""
    d0 = float(np.hypot(*real.center_offset))
    rows = [(
        "center", *real.center_offset, real.center_height,
        LinkState.LOS.value if real.center_los else LinkState.NLOS.value,
        float(_uav_pathloss(d0, real.center_height, real.center_los, params)),
    )]
    Lu = _uav_pathloss(real.uav_r, real.uav_height, real.uav_los, params)
    for (x, y), h, los, L, grp in zip(real.uav_xy, real.uav_height, real.uav_los, Lu, real.uav_group):
        rows.append((f"uav{grp}", x, y, h, "los" if los else "nlos", L))
    for x, y in real.bs_xy:
        rows.append(("bs", x, y, 0.0, "", params.eta_b * math.hypot(x, y) ** params.alpha_b))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DUMP_HEADER)
        for row in rows:
            w.writerow([row[0]] + [f"{v:.9g}" if isinstance(v, float) else v for v in row[1:]])
