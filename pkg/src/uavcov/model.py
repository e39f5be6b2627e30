"""Network parameters, tier/state identifiers and unit conversions.

Everything downstream works in linear SI units: watts, metres and points
per square metre.  dB and dBm only appear at the configuration boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence


def dbm_to_watts(x):
    """Convert a power in dBm to watts."""
    return 10.0 ** ((x - 30.0) / 10.0)


def watts_to_dbm(w):
    return 10.0 * math.log10(w) + 30.0


def db_to_linear(x):
    return 10.0 ** (x / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


class LinkState(enum.Enum):
    LOS = "los"
    NLOS = "nlos"

    @classmethod
    def coerce(cls, value) -> "LinkState":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class TierKind(enum.IntEnum):
    # Ordering doubles as the simulator tie-break priority.
    CENTER_UAV = 0
    FIELD_UAV = 1
    GROUND_BS = 2


@dataclass(frozen=True)
class TierRef:
    """Serving or interfering tier.

    ``m`` is the height group (1..M) of a field-UAV tier; it is 1 for the
    single-height network and ignored for the other kinds.
    """

    kind: TierKind
    m: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"height-group index must be >= 1, got {self.m}")

    @classmethod
    def center(cls):
        return cls(TierKind.CENTER_UAV)

    @classmethod
    def field(cls, m=1):
        return cls(TierKind.FIELD_UAV, m)

    @classmethod
    def bs(cls):
        return cls(TierKind.GROUND_BS)


class Violation(NamedTuple):
    field: str
    reason: str

    def __str__(self):
        return self.reason


class ValidationError(ValueError):
    """Raised by :func:`validate`; ``violations`` lists every failed check."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


_TABLE_P_TX = (dbm_to_watts(37.0), dbm_to_watts(37.0), dbm_to_watts(40.0))
_TABLE_NOISE = (dbm_to_watts(-90.0),) * 3


@dataclass(frozen=True)
class SystemParams:
    """Two-tier UAV/BS downlink with Thomas-clustered users.

    Defaults are the reference operating point: lambda_u=1e-4, lambda_b=1e-5,
    H=10 m, sigma_c=5 m, exponents 3/3.5/3.5, extra losses 1/10/1,
    b=11.95, c=0.136, powers 37/37/40 dBm, unit biases, 0 dB thresholds and
    -90 dBm noise.  Per-tier tuples are indexed center UAV, field UAVs, BSs.
    """

    lambda_u: float = 1e-4
    lambda_b: float = 1e-5
    height: float = 10.0
    sigma_c: float = 5.0
    alpha_los: float = 3.0
    alpha_nlos: float = 3.5
    alpha_b: float = 3.5
    eta_los: float = 1.0
    eta_nlos: float = 10.0
    eta_b: float = 1.0
    env_b: float = 11.95
    env_c: float = 0.136
    p_tx: tuple = _TABLE_P_TX
    bias: tuple = (1.0, 1.0, 1.0)
    noise: tuple = _TABLE_NOISE
    sinr_threshold: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        for name in ("p_tx", "bias", "noise", "sinr_threshold"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    def alpha(self, state: LinkState) -> float:
        return self.alpha_los if state is LinkState.LOS else self.alpha_nlos

    def eta(self, state: LinkState) -> float:
        return self.eta_los if state is LinkState.LOS else self.eta_nlos


@dataclass(frozen=True)
class MultiHeightParams:
    """UAVs split into M height groups; the typical UE sits in a cluster of
    group ``anchor_tier`` (1-based)."""

    heights: tuple
    lambda_m: tuple
    p_tx_m: tuple
    bias_m: tuple
    anchor_tier: int = 1

    def __post_init__(self):
        for name in ("heights", "lambda_m", "p_tx_m", "bias_m"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @property
    def M(self) -> int:
        return len(self.heights)

    @classmethod
    def single(cls, params: SystemParams) -> "MultiHeightParams":
        """The M=1 description equivalent to ``params``."""
        return cls(
            heights=(params.height,),
            lambda_m=(params.lambda_u,),
            p_tx_m=(params.p_tx[1],),
            bias_m=(params.bias[1],),
            anchor_tier=1,
        )

    @classmethod
    def even_split(cls, params: SystemParams, heights, anchor_tier=1):
        M = len(heights)
        return cls(
            heights=tuple(heights),
            lambda_m=(params.lambda_u / M,) * M,
            p_tx_m=(params.p_tx[1],) * M,
            bias_m=(params.bias[1],) * M,
            anchor_tier=anchor_tier,
        )


def _finite(x):
    return isinstance(x, (int, float)) and math.isfinite(x)


def violations(params: SystemParams) -> list[Violation]:
    out = []

    def check(ok, name, reason):
        if not ok:
            out.append(Violation(name, reason))

    for name in ("lambda_u", "lambda_b"):
        v = getattr(params, name)
        check(_finite(v) and v >= 0, name, f"{name} must be non-negative")
    check(_finite(params.height) and params.height > 0, "height", "height must be positive")
    check(_finite(params.sigma_c) and params.sigma_c > 0, "sigma_c", "sigma_c must be positive")
    for name in ("alpha_los", "alpha_nlos", "alpha_b"):
        v = getattr(params, name)
        check(_finite(v) and v > 2, name, f"{name} must exceed 2")
    for name in ("eta_los", "eta_nlos", "eta_b"):
        v = getattr(params, name)
        check(_finite(v) and v > 0, name, f"{name} must be positive")
    check(_finite(params.env_b) and params.env_b > 0, "env_b", "env_b must be positive")
    check(_finite(params.env_c) and params.env_c > 0, "env_c", "env_c must be positive")
    for name in ("p_tx", "bias", "noise", "sinr_threshold"):
        values = getattr(params, name)
        if len(values) != 3:
            out.append(Violation(name, f"{name} must have 3 entries, got {len(values)}"))
            continue
        for k, v in enumerate(values):
            if name == "noise":
                check(_finite(v) and v >= 0, name, f"{name}[{k}] must be non-negative")
            else:
                check(_finite(v) and v > 0, name, f"{name}[{k}] must be positive")
    return out


def validate(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged, or raise :class:`ValidationError` naming
    every violated constraint."""
    found = violations(params)
    if found:
        raise ValidationError(found)
    return params


def validate_multiheight(mh: MultiHeightParams, params: SystemParams) -> MultiHeightParams:
    found = []
    M = mh.M
    if M < 1:
        found.append(Violation("heights", "at least one height group is required"))
    for name in ("lambda_m", "p_tx_m", "bias_m"):
        if len(getattr(mh, name)) != M:
            found.append(Violation(name, f"{name} must have {M} entries"))
    if any(not (_finite(h) and h > 0) for h in mh.heights):
        found.append(Violation("heights", "all heights must be positive"))
    if any(not (_finite(v) and v >= 0) for v in mh.lambda_m):
        found.append(Violation("lambda_m", "densities must be non-negative"))
    if any(not (_finite(v) and v > 0) for v in mh.p_tx_m + mh.bias_m):
        found.append(Violation("p_tx_m", "powers and biases must be positive"))
    if not 1 <= mh.anchor_tier <= max(M, 1):
        found.append(Violation("anchor_tier", f"anchor_tier must be within 1..{M}"))
    total = sum(mh.lambda_m)
    if abs(total - params.lambda_u) > 1e-12 * max(abs(params.lambda_u), abs(total)):
        found.append(
            Violation("lambda_m", f"group densities sum to {total!r}, expected lambda_u={params.lambda_u!r}")
        )
    if found:
        raise ValidationError(found)
    return mh
