"""Experiment documents.

An experiment is a small TOML document::

    mode = "coverage"            # coverage | association | ase | simulate | validate | sweep
    gamma_db = [-5, 0]           # common SINR thresholds; omit to use sinr_threshold_db

    [params]                     # any omitted key keeps its reference default
    height = 30
    sigma_c = 10                 # or sigma_c2 = 100
    p_tx_dbm = [37, 37, 40]      # per-tier keys take one value or three
    noise_dbm = -90

    [multiheight]
    heights = [10, 20]           # lambda_m defaults to an even split of lambda_u
    anchor_tier = 1

    [sim]
    realizations = 100000
    seed = 7

    [analytic]
    rel_tol = 1e-6
    center_ccdf = "exact"        # or "closed_form"
    center_interferer_normalization = "conditioned"   # or "paper"

    [sweep]
    variable = "height"          # a SystemParams field, "alpha" (all three exponents) or "anchor_tier"
    values = [10, 20, 30]

    [output]
    path = "coverage.csv"

Quantities in dB or dBm must carry the suffix in the key name.  Unknown keys
are rejected with their line number so typos never pass silently.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .association import CENTER_CCDF_FORMS
from .coverage import NORMALIZATIONS
from .model import (
    MultiHeightParams,
    SystemParams,
    ValidationError,
    db_to_linear,
    dbm_to_watts,
    validate,
    validate_multiheight,
)
from .quadrature import DEFAULT_TOL, Tolerance
from .simulator import SimConfig

MODES = ("coverage", "association", "ase", "simulate", "validate", "sweep")

_SCALAR_PARAMS = (
    "lambda_u", "lambda_b", "height", "sigma_c", "alpha_los", "alpha_nlos", "alpha_b",
    "eta_los", "eta_nlos", "eta_b", "env_b", "env_c",
)
# config key -> (SystemParams field, converter)
_TIER_PARAMS = {
    "p_tx_dbm": ("p_tx", dbm_to_watts),
    "bias_db": ("bias", db_to_linear),
    "noise_dbm": ("noise", dbm_to_watts),
    "sinr_threshold_db": ("sinr_threshold", db_to_linear),
}
_FIELD_TO_KEY = {v[0]: k for k, v in _TIER_PARAMS.items()}

_SCHEMA = {
    "": {"mode", "gamma_db"},
    "params": set(_SCALAR_PARAMS) | {"sigma_c2"} | set(_TIER_PARAMS),
    "multiheight": {"heights", "lambda_m", "p_tx_dbm", "bias_db", "anchor_tier"},
    "sim": {"realizations", "seed", "window_radius", "ci_level", "exact_ci", "workers"},
    "analytic": {"rel_tol", "center_ccdf", "center_interferer_normalization", "workers"},
    "sweep": {"variable", "values"},
    "output": {"path"},
}

SWEEP_VARIABLES = _SCALAR_PARAMS + ("alpha", "anchor_tier")


@dataclass(frozen=True)
class Diagnostic:
    key: str
    line: int | None
    message: str

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.key}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: tuple


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str
    params: SystemParams = SystemParams()
    mh: MultiHeightParams | None = None
    sweep: Sweep | None = None
    sim: SimConfig | None = None
    output_path: str | None = None
    gammas_db: tuple | None = None
    tol: Tolerance = DEFAULT_TOL
    center_ccdf: str = "exact"
    normalization: str = "conditioned"
    workers: int = 1

    def points(self):
        """``(sweep value, params, mh)`` for every point, in sweep order."""
        if self.sweep is None:
            return [(None, self.params, self.mh)]
        return [(v, *apply_sweep(self.params, self.mh, self.sweep.variable, v)) for v in self.sweep.values]

    def thresholds(self):
        """``(gamma_db or None, linear per-tier thresholds)`` pairs."""
        if self.gammas_db is None:
            thr = self.params.sinr_threshold
            common = 10.0 * math.log10(thr[0]) if len(set(thr)) == 1 else None
            return [(common, thr)]
        return [(g, (db_to_linear(g),) * 3) for g in self.gammas_db]


def apply_sweep(params: SystemParams, mh: MultiHeightParams | None, variable: str, value):
    if variable == "alpha":
        return replace(params, alpha_los=value, alpha_nlos=value, alpha_b=value), mh
    if variable == "anchor_tier":
        if mh is None:
            raise ConfigError([Diagnostic("sweep.variable", None, "anchor_tier needs a [multiheight] section")])
        return params, replace(mh, anchor_tier=int(value))
    if variable == "lambda_u" and mh is not None:
        scale = value / params.lambda_u if params.lambda_u > 0 else 0.0
        lam = tuple(v * scale for v in mh.lambda_m) if scale else (value / mh.M,) * mh.M
        return replace(params, lambda_u=value), replace(mh, lambda_m=lam)
    if variable == "height" and mh is not None:
        raise ConfigError([Diagnostic("sweep.variable", None, "height sweeps are ambiguous with [multiheight]")])
    return replace(params, **{variable: float(value)}), mh


def _key_lines(text):
    """Map ``section.key`` to the line where it is assigned."""
    out = {}
    section = ""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.]+)\s*\]$", line)
        if m:
            section = m.group(1)
            out.setdefault(section, n)
            continue
        m = re.match(r"^([A-Za-z0-9_\-\"']+)\s*=", line)
        if m:
            key = m.group(1).strip("\"'")
            out.setdefault(f"{section}.{key}" if section else key, n)
    return out


def _tier_values(key, value, convert):
    vals = value if isinstance(value, list) else [value] * 3
    if len(vals) != 3 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
        raise TypeError(f"{key} takes one number or a list of three")
    return tuple(convert(float(v)) for v in vals)


def _number(value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError("expected a number")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise TypeError("expected an integer")
        return int(value)
    return float(value)


def _float_list(value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),)
    if not isinstance(value, list) or not value:
        raise TypeError("expected a non-empty list of numbers")
    return tuple(_number(v) for v in value)


def parse_config(text: str, mode: str | None = None) -> ExperimentSpec:
    """Parse and validate an experiment document.

    ``mode`` overrides the document's ``mode`` key.  Raises
    :class:`ConfigError` listing every problem found.
    """
    lines = _key_lines(text)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([Diagnostic("<document>", None, str(exc))]) from None

    diags = []

    def bad(path, message):
        diags.append(Diagnostic(path, lines.get(path), message))

    for key, value in doc.items():
        if isinstance(value, dict):
            if key not in _SCHEMA or key == "":
                bad(key, "unknown section")
                continue
            for sub in value:
                if sub not in _SCHEMA[key]:
                    bad(f"{key}.{sub}", "unknown key")
        elif key not in _SCHEMA[""]:
            bad(key, "unknown key")

    mode = mode or doc.get("mode", "coverage")
    if mode not in MODES:
        bad("mode", f"must be one of {', '.join(MODES)}")

    def section(name):
        s = doc.get(name, {})
        return s if isinstance(s, dict) else {}

    # [params]
    p = section("params")
    kw = {}
    for key in _SCALAR_PARAMS:
        if key in p:
            try:
                kw[key] = _number(p[key])
            except TypeError as exc:
                bad(f"params.{key}", str(exc))
    if "sigma_c2" in p:
        if "sigma_c" in p:
            bad("params.sigma_c2", "give sigma_c or sigma_c2, not both")
        else:
            try:
                v = _number(p["sigma_c2"])
                kw["sigma_c"] = math.sqrt(v) if v > 0 else v
            except TypeError as exc:
                bad("params.sigma_c2", str(exc))
    for key, (name, convert) in _TIER_PARAMS.items():
        if key in p:
            try:
                kw[name] = _tier_values(key, p[key], convert)
            except TypeError as exc:
                bad(f"params.{key}", str(exc))
    params = SystemParams(**kw)
    try:
        validate(params)
    except ValidationError as exc:
        for v in exc.violations:
            key = _FIELD_TO_KEY.get(v.field, v.field)
            if key == "sigma_c" and "sigma_c2" in p:
                key = "sigma_c2"
            bad(f"params.{key}", v.reason)

    # [multiheight]
    mh = None
    if "multiheight" in doc:
        s = section("multiheight")
        try:
            heights = _float_list(s.get("heights"))
            M = len(heights)
            lam = _float_list(s["lambda_m"]) if "lambda_m" in s else (params.lambda_u / M,) * M
            ptx = (tuple(dbm_to_watts(v) for v in _float_list(s["p_tx_dbm"])) if "p_tx_dbm" in s
                   else (params.p_tx[1],) * M)
            bias = (tuple(db_to_linear(v) for v in _float_list(s["bias_db"])) if "bias_db" in s
                    else (params.bias[1],) * M)
            if len(ptx) == 1:
                ptx = ptx * M
            if len(bias) == 1:
                bias = bias * M
            mh = MultiHeightParams(heights, lam, ptx, bias, _number(s.get("anchor_tier", 1), int))
            validate_multiheight(mh, params)
        except TypeError as exc:
            bad("multiheight", str(exc))
            mh = None
        except ValidationError as exc:
            for v in exc.violations:
                bad(f"multiheight.{v.field}", v.reason)
            mh = None

    # top-level gamma_db
    gammas = None
    if "gamma_db" in doc:
        try:
            gammas = _float_list(doc["gamma_db"])
        except TypeError as exc:
            bad("gamma_db", str(exc))
    if mode == "ase":
        if gammas is None and len(set(params.sinr_threshold)) != 1:
            bad("params.sinr_threshold_db", "ase uses one common threshold; per-tier values are not allowed")
        if "sinr_threshold_db" in p and isinstance(p["sinr_threshold_db"], list) and len(set(p["sinr_threshold_db"])) > 1:
            bad("params.sinr_threshold_db", "ase uses one common threshold; per-tier values are not allowed")

    # [analytic]
    a = section("analytic")
    tol = DEFAULT_TOL
    if "rel_tol" in a:
        try:
            tol = Tolerance(rel=_number(a["rel_tol"]))
        except (TypeError, ValueError) as exc:
            bad("analytic.rel_tol", str(exc))
    center_ccdf = a.get("center_ccdf", "exact")
    if center_ccdf not in CENTER_CCDF_FORMS:
        bad("analytic.center_ccdf", f"must be one of {', '.join(CENTER_CCDF_FORMS)}")
    normalization = a.get("center_interferer_normalization", "conditioned")
    if normalization not in NORMALIZATIONS:
        bad("analytic.center_interferer_normalization", f"must be one of {', '.join(NORMALIZATIONS)}")
    workers = 1
    try:
        workers = max(1, _number(a.get("workers", 1), int))
    except TypeError as exc:
        bad("analytic.workers", str(exc))

    # [sim]
    sim = None
    if "sim" in doc or mode in ("simulate", "validate"):
        s = section("sim")
        try:
            sim = SimConfig(
                window_radius=_number(s["window_radius"]) if "window_radius" in s else None,
                n_realizations=_number(s.get("realizations", 100_000), int),
                seed=_number(s.get("seed", 0), int),
                ci_level=_number(s.get("ci_level", 0.95)),
                mh=mh,
                exact_ci=bool(s.get("exact_ci", False)),
                workers=max(1, _number(s.get("workers", 1), int)),
            )
        except (TypeError, ValueError) as exc:
            bad("sim", str(exc))

    # [sweep]
    sweep = None
    if "sweep" in doc:
        s = section("sweep")
        var = s.get("variable")
        if var not in SWEEP_VARIABLES:
            bad("sweep.variable", f"must be one of {', '.join(SWEEP_VARIABLES)}")
        try:
            values = _float_list(s.get("values"))
            if list(values) != sorted(values):
                bad("sweep.values", "grid must be sorted ascending")
            sweep = Sweep(var, values)
        except TypeError as exc:
            bad("sweep.values", str(exc))
        if sweep is not None and var in SWEEP_VARIABLES and not diags:
            for v in sweep.values:
                try:
                    sp, smh = apply_sweep(params, mh, var, v)
                    validate(sp)
                    if smh is not None:
                        validate_multiheight(smh, sp)
                except ValidationError as exc:
                    bad("sweep.values", f"{var}={v:g}: {exc}")
                    break
                except ConfigError as exc:
                    diags.extend(exc.diagnostics)
                    break
    elif mode == "sweep":
        bad("sweep", "sweep mode needs a [sweep] section")

    out = section("output").get("path")
    if out is not None and not isinstance(out, str):
        bad("output.path", "expected a string")

    if diags:
        raise ConfigError(diags)
    return ExperimentSpec(
        mode=mode, params=params, mh=mh, sweep=sweep, sim=sim, output_path=out, gammas_db=gammas,
        tol=tol, center_ccdf=center_ccdf, normalization=normalization, workers=workers,
    )
