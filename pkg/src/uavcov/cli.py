"""Coverage, association and ASE calculator emitting plot-ready CSV.

Verbs cover single points, sweeps, Monte Carlo validation and figure presets.

Exit codes: 0 ok, 1 usage or configuration error, 2 a validate row failed
its tolerance, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .association import build_network, profile_for
from .config import ConfigError, ExperimentSpec, Sweep, parse_config
from .coverage import evaluate_network
from .model import MultiHeightParams, SystemParams, ValidationError
from .quadrature import QuadratureError, Tolerance
from .simulator import SimConfig, dump_realization, sample_realization, simulate

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

ASSOC_COLS = ("a0_los", "a0_nlos", "a1_los", "a1_nlos", "a2")
COVERAGE_COLS = ASSOC_COLS + ("p_c0", "p_c1", "p_c2", "p_c_total", "ase")
VALIDATE_COLS = ("mc_mean", "mc_stderr", "abs_diff", "pass")
SIM_COLS = COVERAGE_COLS[:-2] + ("p_c_total", "p_c_total_stderr", "ase", "ase_stderr", "n", "seed")


def header(spec: ExperimentSpec):
    first = spec.sweep.variable if spec.sweep else "point"
    if spec.mode == "association":
        return (first,) + ASSOC_COLS + ("a_total",)
    if spec.mode == "ase":
        return (first, "gamma_db", "ase")
    if spec.mode == "simulate":
        return (first, "gamma_db") + SIM_COLS
    cols = (first, "gamma_db") + COVERAGE_COLS
    return cols + VALIDATE_COLS if spec.mode == "validate" else cols


def fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return "nan"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def _grouped(probs, M):
    """Fold per-event values into (0_los, 0_nlos, field los, field nlos, BS)."""
    f_los = sum(probs.get(f"{m}_los", 0.0) for m in range(1, M + 1))
    f_nlos = sum(probs.get(f"{m}_nlos", 0.0) for m in range(1, M + 1))
    return probs["0_los"], probs["0_nlos"], f_los, f_nlos, probs[str(M + 1)]


def _point_rows(args):
    spec, value, params, mh = args
    key = 0 if value is None else value
    net = build_network(params, mh, spec.center_ccdf)
    M = net.M
    if spec.mode == "association":
        prof = profile_for(net, spec.tol)
        return [(key,) + _grouped(prof.probs, M) + (prof.total,)]

    rows = []
    run = None
    if spec.mode in ("simulate", "validate"):
        run = simulate(params, replace(spec.sim, mh=mh))
    for gamma_db, thr in spec.thresholds():
        if spec.mode == "simulate":
            assoc = {k: e.mean for k, e in run.association().items()}
            tot, per = run.coverage(thr)
            per = {k: e.mean for k, e in per.items()}
            g = _grouped(per, M)
            ase_est = run.ase(thr[0]) if gamma_db is not None else None
            rows.append((key, gamma_db) + _grouped(assoc, M) + (g[0] + g[1], g[2] + g[3], g[4])
                        + (tot.mean, tot.stderr,
                           ase_est.mean if ase_est else None, ase_est.stderr if ase_est else None,
                           tot.n, tot.seed))
            continue
        rep = evaluate_network(net, thr, spec.tol, spec.normalization)
        if spec.mode == "ase":
            rows.append((key, gamma_db, rep.ase))
            continue
        row = (key, gamma_db) + _grouped(rep.association.probs, M) + rep.tier_terms() + (rep.total, rep.ase)
        if spec.mode == "validate":
            tot, _ = run.coverage(thr)
            diff = abs(rep.total - tot.mean)
            row += (tot.mean, tot.stderr, diff, bool(diff <= max(0.02, 3.0 * tot.stderr)))
        rows.append(row)
    return rows


def run_rows(spec: ExperimentSpec):
    """All CSV rows of ``spec`` in sweep order."""
    jobs = [(spec, v, p, mh) for v, p, mh in spec.points()]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            parts = list(pool.map(_point_rows, jobs))
    else:
        parts = [_point_rows(j) for j in jobs]
    return [row for part in parts for row in part]


def write_csv(head, rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(head)
    for row in rows:
        w.writerow([fmt(v) for v in row])


# Figure presets.  Each is a list of (curve label, spec).
_GAMMA_GRID = tuple(float(g) for g in np.arange(-10.0, 20.01, 2.0))


def _spec(mode, params=SystemParams(), **kw):
    return ExperimentSpec(mode=mode, params=params, **kw)


def preset(name: str):
    base = SystemParams()
    if name == "fig2":
        sweep = Sweep("sigma_c", tuple(float(s) for s in range(1, 21)))
        return [(f"H={h:g}", _spec("association", replace(base, height=h), sweep=sweep)) for h in (10.0, 30.0)]
    if name == "fig3":
        return [(f"H={h:g}", _spec("coverage", replace(base, height=h), gammas_db=_GAMMA_GRID))
                for h in (10.0, 20.0, 30.0)]
    if name == "fig4":
        sweep = Sweep("alpha", tuple(float(a) for a in np.arange(2.5, 5.001, 0.25)))
        return [(f"H={h:g}", _spec("coverage", replace(base, height=h), sweep=sweep, gammas_db=(0.0,)))
                for h in (10.0, 30.0)]
    if name == "fig5":
        return [(f"lambda_u={lam:g}", _spec("coverage", replace(base, lambda_u=lam), gammas_db=_GAMMA_GRID))
                for lam in (1e-5, 1e-4, 1e-3)]
    if name == "fig6":
        sweep = Sweep("lambda_u", tuple(float(v) for v in np.logspace(-6, -3, 13)))
        return [(f"sigma_c={s:g}", _spec("ase", replace(base, sigma_c=s), sweep=sweep, gammas_db=(0.0,)))
                for s in (2.0, 5.0, 10.0)]
    if name == "fig7":
        out = []
        for s in (5.0, 10.0):
            p = replace(base, sigma_c=s)
            for h in (10.0, 20.0):
                out.append((f"sigma_c={s:g} single H={h:g}", _spec("coverage", replace(p, height=h), gammas_db=_GAMMA_GRID)))
            for m in (1, 2):
                mh = MultiHeightParams.even_split(p, (10.0, 20.0), anchor_tier=m)
                out.append((f"sigma_c={s:g} two heights anchor={m}", _spec("coverage", p, mh=mh, gammas_db=_GAMMA_GRID)))
        return out
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


def _override(spec: ExperimentSpec, args) -> ExperimentSpec:
    changes = {}
    if args.tol_rel is not None:
        changes["tol"] = Tolerance(rel=args.tol_rel)
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.out is not None:
        changes["output_path"] = args.out
    sim = spec.sim
    if sim is not None or args.seed is not None or args.realizations is not None:
        sim = sim or SimConfig(mh=spec.mh)
        if args.seed is not None:
            sim = replace(sim, seed=args.seed)
        if args.realizations is not None:
            sim = replace(sim, n_realizations=args.realizations)
        changes["sim"] = sim
    return replace(spec, **changes)


def build_parser():
    ap = argparse.ArgumentParser(prog="uavcov", description=__doc__.splitlines()[0])
    ap.add_argument("verb", choices=("coverage", "association", "ase", "simulate", "validate", "sweep", "preset"))
    ap.add_argument("name", nargs="?", help="preset name (fig2 ... fig7)")
    ap.add_argument("--config", help="TOML experiment document")
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--realizations", type=int)
    ap.add_argument("--tol-rel", type=float)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--dump", help="simulate: write realization 0 of the first point as CSV")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.verb == "preset":
            if args.name not in PRESETS:
                print(f"error: preset must be one of {', '.join(PRESETS)}", file=sys.stderr)
                return EXIT_CONFIG
            curves = [(label, _override(s, args)) for label, s in preset(args.name)]
            out_path = args.out
        else:
            text = ""
            if args.config:
                with open(args.config) as fh:
                    text = fh.read()
            spec = _override(parse_config(text, mode=args.verb), args)
            curves = [(None, spec)]
            out_path = spec.output_path

        buf = io.StringIO()
        status = EXIT_OK
        for i, (label, spec) in enumerate(curves):
            rows = run_rows(spec)
            if spec.mode == "validate" and not all(r[-1] for r in rows):
                status = EXIT_VALIDATION
            head = header(spec)
            if label is not None:
                head, rows = ("curve",) + head, [(label,) + r for r in rows]
            if i == 0:
                write_csv(head, rows, buf)
            else:
                csv.writer(buf, lineterminator="\n").writerows([[fmt(v) for v in r] for r in rows])
        if args.dump and curves[0][1].mode == "simulate":
            _, p, mh = curves[0][1].points()[0]
            dump_realization(sample_realization(p, replace(curves[0][1].sim, mh=mh), 0), p, args.dump)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return status


if __name__ == "__main__":
    sys.exit(main())
