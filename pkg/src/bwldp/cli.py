"""Command-line front end: ``bwldp <subcommand> CONFIG [--out DIR] [flags]``.

Every subcommand reads one JSON config, writes its result to ``--out`` as JSON
(single results) or CSV (tables) and always writes ``manifest.json``. Exit
codes: 0 success, 2 configuration error, 3 numerical failure, 4 infeasible
anchor.
"""

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .barycenter import barycenter_fixed_point
from .exceptions import BWError, InfeasibleAnchor, InvalidPopulation
from .gradient import rate_gradient
from .ldp import hoeffding_reference, prgd, rate_profile
from .montecarlo import exact_log_tail, rate_slope, two_point_scalar
from .population import DiscretePopulation, validate
from .spd import bw_distance
from .tilting import solve_dual, tilt
from .univariate import (
    DEFAULT_GRID,
    QuantileFunction,
    UnivariatePopulation,
    gaussian_quantile,
    point_mass,
    uv_barycenter,
    uv_solve,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4
SUBCOMMANDS = ("validate", "barycenter", "rate", "grad", "tilt", "prgd", "profile",
               "simulate", "uv-barycenter", "uv-rate")


class ConfigError(Exception):
    pass


def _clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return obj


def _matrix(cfg, key, d):
    if key not in cfg:
        raise ConfigError(f"missing '{key}'")
    try:
        return np.asarray(cfg[key], dtype=float).reshape(d, d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{key}' must hold {d * d} reals in row-major order") from exc


def _population(cfg, base):
    if "population" in cfg:
        spec = cfg["population"]
    elif "population_file" in cfg:
        with open(os.path.join(base, cfg["population_file"])) as fh:
            spec = json.load(fh)
    else:
        raise ConfigError("config needs 'population' or 'population_file'")
    try:
        return DiscretePopulation.from_dict(spec).require_valid()
    except (InvalidPopulation, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _quantile(spec, m):
    if isinstance(spec, dict) and "family" in spec:
        fam = spec["family"]
        if fam == "gaussian":
            return gaussian_quantile(float(spec["scale"]), m, float(spec.get("loc", 0.0)))
        if fam == "point_mass":
            return point_mass(float(spec["value"]), m)
        raise ConfigError(f"unknown quantile family {fam!r}")
    values = spec["values"] if isinstance(spec, dict) else spec
    return QuantileFunction(values)


def _uv_population(cfg, base):
    spec = cfg.get("uv_population")
    if spec is None:
        raise ConfigError("config needs 'uv_population'")
    m = int(spec.get("m", DEFAULT_GRID))
    if "csv" in spec:
        with open(os.path.join(base, spec["csv"]), newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        try:
            cols = np.array([[float(x) for x in r] for r in rows[1:]]).T
        except ValueError as exc:
            raise ConfigError(f"quantile CSV must be numeric below the header: {exc}") from exc
        atoms = [QuantileFunction(c) for c in cols]
    else:
        atoms = [_quantile(a, m) for a in spec["atoms"]]
    weights = spec.get("weights", [1.0 / len(atoms)] * len(atoms))
    try:
        return UnivariatePopulation(atoms, weights)
    except (InvalidPopulation, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _write_json(out, name, payload):
    path = os.path.join(out, name)
    with open(path, "w") as fh:
        json.dump(_clean(payload), fh, indent=2)
    return path


def _write_csv(out, name, header, rows):
    path = os.path.join(out, name)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_clean(v) for v in row])
    return path


def _dual_payload(sol):
    return {
        "I_P": sol.rate,
        "A_M": sol.A.reshape(-1),
        "tilted_weights": sol.tilted_weights,
        "feasible": sol.feasible,
        "status": sol.status,
        "residual": sol.residual,
        "iterations": sol.iterations,
    }


def _tols(cfg, args):
    tol = args.tol if args.tol is not None else cfg.get("tol")
    cap = args.cap if args.cap is not None else cfg.get("cap", 1e6)
    max_iter = args.max_iter if args.max_iter is not None else cfg.get("max_iter")
    return tol, cap, max_iter


def run_validate(cfg, args, base):
    spec = cfg.get("population")
    if spec is None and "population_file" in cfg:
        with open(os.path.join(base, cfg["population_file"])) as fh:
            spec = json.load(fh)
    if spec is None:
        raise ConfigError("config needs 'population' or 'population_file'")
    try:
        d = int(spec["dim"])
        atoms = [np.asarray(a, dtype=float).reshape(d, d) for a in spec["atoms"]]
        report = validate((atoms, spec["weights"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed population: {exc}") from exc
    files = [_write_json(args.out, "validate.json", report.to_dict())]
    return (EXIT_OK if report.ok else EXIT_CONFIG), files


def run_barycenter(cfg, args, base):
    P = _population(cfg, base)
    tol, _, max_iter = _tols(cfg, args)
    kw = {k: v for k, v in (("tol", tol), ("max_iter", max_iter)) if v is not None}
    res = barycenter_fixed_point(P, **kw)
    payload = {"barycenter": res.barycenter.reshape(-1), "iterations": res.iterations,
               "residual": res.residual, "converged": res.converged}
    files = [_write_json(args.out, "barycenter.json", payload)]
    return (EXIT_OK if res.converged else EXIT_NUMERIC), files


def _solve(cfg, args, P, M):
    tol, cap, max_iter = _tols(cfg, args)
    kw = {"cap": cap}
    if tol is not None:
        kw["tol"] = tol
    if max_iter is not None:
        kw["max_iter"] = max_iter
    return solve_dual(P, M, **kw)


def _status_code(sol):
    if sol.status == "infeasible":
        return EXIT_INFEASIBLE
    if sol.status == "max_iter":
        return EXIT_NUMERIC
    return EXIT_OK


def run_rate(cfg, args, base):
    P = _population(cfg, base)
    sol = _solve(cfg, args, P, _matrix(cfg, "anchor", P.dim))
    return _status_code(sol), [_write_json(args.out, "rate.json", _dual_payload(sol))]


def run_grad(cfg, args, base):
    P = _population(cfg, base)
    M = _matrix(cfg, "anchor", P.dim)
    sol = _solve(cfg, args, P, M)
    if not sol.feasible:
        payload = {"error": f"gradient undefined: dual status {sol.status}", **_dual_payload(sol)}
        code = EXIT_INFEASIBLE if sol.status in ("infeasible", "boundary") else EXIT_NUMERIC
        return code, [_write_json(args.out, "grad.json", payload)]
    G = rate_gradient(P, M, sol)
    payload = {"gradient": G.reshape(-1), "riemannian_gradient": (2 * G).reshape(-1), "I_P": sol.rate}
    return EXIT_OK, [_write_json(args.out, "grad.json", payload)]


def run_tilt(cfg, args, base):
    P = _population(cfg, base)
    M = _matrix(cfg, "anchor", P.dim)
    A = _matrix(cfg, "tilt", P.dim)
    tp = tilt(P, M, A)
    payload = {"anchor": M.reshape(-1), "tilt": A.reshape(-1), "tilted_weights": tp.tilted_weights}
    return EXIT_OK, [_write_json(args.out, "tilt.json", payload)]


def _center(cfg, P):
    if "center" in cfg:
        return _matrix(cfg, "center", P.dim)
    return barycenter_fixed_point(P).barycenter


def run_prgd(cfg, args, base):
    P = _population(cfg, base)
    center = _center(cfg, P)
    r = float(cfg.get("radius", 0.0))
    eta = args.eta if args.eta is not None else cfg.get("eta")
    init = _matrix(cfg, "init", P.dim) if "init" in cfg else None
    res = prgd(P, center, r, eta=eta, iters=int(cfg.get("iters", 200)), init=init)
    payload = {"argmin": res.argmin.reshape(-1), "I_P": res.value, "trace": res.trace,
               "iterations": res.iterations, "status": res.status,
               "distance": bw_distance(res.argmin, center)}
    code = EXIT_INFEASIBLE if res.status == "infeasible_start" else EXIT_OK
    return code, [_write_json(args.out, "prgd.json", payload)]


def run_profile(cfg, args, base):
    P = _population(cfg, base)
    center = _center(cfg, P)
    radii = cfg.get("radii")
    if not radii:
        raise ConfigError("profile needs a nonempty 'radii' list")
    eta = args.eta if args.eta is not None else cfg.get("eta")
    prof = rate_profile(P, center, radii, iters=int(cfg.get("iters", 200)), eta=eta,
                        workers=args.threads)
    ref = hoeffding_reference(P, center, prof.radii)
    d2 = P.dim * P.dim
    header = ["radius", "i_P"] + [f"argmin_{j}" for j in range(d2)] + ["hoeffding_reference", "bound_ok"]
    rows = [[r, v, *M.reshape(-1), h, bool(v >= h - 1e-8)]
            for (r, v, M), h in zip(prof.rows(), ref)]
    return EXIT_OK, [_write_csv(args.out, "profile.csv", header, rows)]


def run_simulate(cfg, args, base):
    P = _population(cfg, base)
    sim = cfg.get("simulate", {})
    try:
        r = float(sim["radius"])
        n_grid = [int(n) for n in sim["n_grid"]]
        replicates = int(sim.get("replicates", 10000))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"simulate needs radius, n_grid, replicates: {exc}") from exc
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    reference = sim.get("reference")
    fit = rate_slope(P, r, n_grid, replicates, seed, reference=reference, workers=args.threads,
                     prefactor_power=float(sim.get("prefactor_power", 0.5)))
    header = ["n", "replicates", "hits", "p_hat", "wilson_lo", "wilson_hi",
              "minus_log_p_over_n", "used", "slope"]
    exact = args.exact and two_point_scalar(P) is not None
    if exact:
        header += ["exact_p", "exact_minus_log_p_over_n"]
    rows = []
    for row in fit.table:
        line = [row[h] for h in header[:8]] + [fit.slope]
        if exact:
            lt = exact_log_tail(P, row["n"], r)
            line += [math.exp(lt), -lt / row["n"]]
        rows.append(line)
    files = [_write_csv(args.out, "simulate.csv", header, rows)]
    summary = {"status": fit.status, "slope": fit.slope, "intercept": fit.intercept,
               "slope_uncorrected": fit.slope_uncorrected, "prefactor_power": fit.prefactor_power,
               "reference": fit.reference, "exact_available": exact,
               "failures": sum(row["failures"] for row in fit.table)}
    files.append(_write_json(args.out, "simulate.json", summary))
    return (EXIT_NUMERIC if summary["failures"] else EXIT_OK), files


def run_uv_barycenter(cfg, args, base):
    P = _uv_population(cfg, base)
    q = uv_barycenter(P)
    return EXIT_OK, [_write_json(args.out, "uv-barycenter.json", {"m": q.m, "values": q.values})]


def run_uv_rate(cfg, args, base):
    P = _uv_population(cfg, base)
    if "uv_target" not in cfg:
        raise ConfigError("uv-rate needs 'uv_target'")
    target = _quantile(cfg["uv_target"], P.m)
    tol, cap, max_iter = _tols(cfg, args)
    kw = {"cap": cap}
    if tol is not None:
        kw["tol"] = tol
    if max_iter is not None:
        kw["max_iter"] = max_iter
    res = uv_solve(P, target, **kw)
    payload = {"I_P": res.value, "status": res.status, "feasible": res.feasible,
               "tilted_weights": res.tilted_weights, "residual": res.residual, "primal": res.primal}
    code = {"infeasible": EXIT_INFEASIBLE, "max_iter": EXIT_NUMERIC}.get(res.status, EXIT_OK)
    return code, [_write_json(args.out, "uv-rate.json", payload)]


RUNNERS = {
    "validate": run_validate,
    "barycenter": run_barycenter,
    "rate": run_rate,
    "grad": run_grad,
    "tilt": run_tilt,
    "prgd": run_prgd,
    "profile": run_profile,
    "simulate": run_simulate,
    "uv-barycenter": run_uv_barycenter,
    "uv-rate": run_uv_rate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="bwldp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--cap", type=float, default=None)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        if name == "simulate":
            p.add_argument("--exact", action="store_true",
                           help="add exact binomial tails for scalar two-atom populations")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    files, digest, cfg = [], None, {}
    try:
        with open(args.config, "rb") as fh:
            raw = fh.read()
        digest = hashlib.sha256(raw).hexdigest()
        cfg = json.loads(raw)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        task = cfg.get("task")
        if task is not None and task != args.command:
            raise ConfigError(f"config is for task {task!r}, not {args.command!r}")
        code, files = RUNNERS[args.command](cfg, args, os.path.dirname(os.path.abspath(args.config)))
    except (OSError, json.JSONDecodeError, ConfigError, KeyError) as exc:
        code = EXIT_CONFIG
        files = [_write_json(args.out, "error.json", {"error": f"configuration: {exc}"})]
    except InfeasibleAnchor as exc:
        code = EXIT_INFEASIBLE
        files = [_write_json(args.out, "error.json", {"error": f"infeasible anchor: {exc}"})]
    except (BWError, np.linalg.LinAlgError, FloatingPointError) as exc:
        code = EXIT_NUMERIC
        files = [_write_json(args.out, "error.json",
                             {"error": f"numerical failure: {exc}", "type": type(exc).__name__})]
    finished = datetime.now(timezone.utc)
    manifest = {
        "subcommand": args.command,
        "config": os.path.abspath(args.config),
        "config_sha256": digest,
        "seed": args.seed if args.seed is not None else cfg.get("seed"),
        "version": __version__,
        "started": started.isoformat(),
        "finished": finished.isoformat(),
        "wall_time_s": time.perf_counter() - t0,
        "threads": args.threads,
        "exit_code": code,
        "outputs": [os.path.basename(f) for f in files],
    }
    _write_json(args.out, "manifest.json", manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
