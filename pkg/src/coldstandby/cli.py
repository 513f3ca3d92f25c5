"""Command-line front end: ``solve``, ``laplace``, ``simulate``, ``converge``.

Floats are written with 17 significant digits so that every binary double
round-trips.  Exit codes: 0 success, 2 invalid input, 3 numerical-domain
failure, 4 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import convergence_sweep, ks_vs_lifetime_cdf
from .errors import ConsistencyError, NumericalDomainError, ParameterError
from .laplace import char_roots, phi_closed_form, phi_tridiagonal
from .model import validate_params
from .montecarlo import METHODS, SimulationConfig, run_trials
from .transient import TimeGrid, default_grid, solve_transient

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DOMAIN = 3
EXIT_CONSISTENCY = 4

# parameters that never influence results and so stay out of the manifest
_NOT_IN_MANIFEST = {"command", "config", "out", "summary", "csv", "threads"}


def fmt(x) -> str:
    return format(float(x), ".17g")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _add_system_args(p: argparse.ArgumentParser, mu_list: bool = False) -> None:
    p.add_argument("--n", type=int, help="number of elements (>= 2)")
    p.add_argument("--lambda", dest="lam", type=float, help="failure rate")
    if mu_list:
        p.add_argument("--mu", type=_float_list, help="comma-separated repair rates, each > lambda")
    else:
        p.add_argument("--mu", type=float, help="repair rate")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="coldstandby", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key=value file supplying defaults; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="transient state probabilities, lifetime CDF and density")
    _add_system_args(solve)
    solve.add_argument("--t-max", type=float, help="grid end (default: survival < 1e-6)")
    solve.add_argument("--points", type=int, default=401)
    solve.add_argument("--tol", type=float, default=1e-12)
    solve.add_argument("--out", default="-")

    lap = sub.add_parser("laplace", help="Laplace transforms of the state probabilities")
    _add_system_args(lap)
    lap.add_argument("--s", type=_float_list, default=[0.0], help="comma-separated transform points")
    lap.add_argument("--method", choices=("tridiagonal", "closed", "both"), default="tridiagonal")
    lap.add_argument("--out", default="-")

    sim = sub.add_parser("simulate", help="Monte Carlo lifetime samples")
    _add_system_args(sim)
    sim.add_argument("--trials", type=int, default=100000)
    sim.add_argument("--seed", type=_seed, default=0)
    sim.add_argument("--method", choices=METHODS, default="event")
    sim.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    sim.add_argument("--out", required=True, help="samples CSV")
    sim.add_argument("--summary", help="summary JSON (default: <out stem>.summary.json)")

    conv = sub.add_parser("converge", help="distance of the normalized lifetime to its limit law")
    _add_system_args(conv, mu_list=True)
    conv.add_argument("--trials", type=int, default=100000)
    conv.add_argument("--seed", type=_seed, default=0)
    conv.add_argument("--method", choices=METHODS, default="visits")
    conv.add_argument("--s-grid", type=_float_list, help="transform points (default: lambda * {0.1..10})")
    conv.add_argument("--threads", type=int)
    conv.add_argument("--out", required=True, help="report JSON")
    conv.add_argument("--csv", help="normalized CDF table (default: <out stem>.csv)")

    return parser, {"solve": solve, "laplace": lap, "simulate": sim, "converge": conv}


def load_config(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            values["lam" if key == "lambda" else key] = value
    return values


def _apply_config(args, argv, parser, subparsers):
    cfg = load_config(args.config)
    sub = subparsers[args.command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ParameterError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def _params(args):
    for flag, dest in (("--n", "n"), ("--lambda", "lam"), ("--mu", "mu")):
        if getattr(args, dest) is None:
            raise ParameterError(f"missing required parameter {flag}")
    mu = args.mu[0] if isinstance(args.mu, list) else args.mu
    return validate_params(args.n, args.lam, mu)


def _manifest(args, checksum: str) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_IN_MANIFEST}
    block = {"command": args.command, "parameters": params, "version": __version__, "output_checksum": checksum}
    if "seed" in params:
        block["seed"] = params["seed"]
    return block


def _sha256(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode()


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def _emit(data: bytes, out: str) -> None:
    if out == "-":
        sys.stdout.write(data.decode())
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _emit_with_manifest(data: bytes, out: str, args) -> None:
    _emit(data, out)
    if out != "-":
        Path(out + ".manifest.json").write_bytes(_json_bytes(_manifest(args, _sha256(data))))


def _sibling(out: str, suffix: str) -> str:
    path = Path(out)
    return str(path.with_name(path.stem + suffix))


def cmd_solve(args) -> int:
    params = _params(args)
    if args.t_max is None:
        grid = default_grid(params, args.points)
    else:
        if args.points < 2:
            raise ParameterError("points must be >= 2")
        if not args.t_max > 0:
            raise ParameterError("t-max must be > 0")
        grid = TimeGrid(np.linspace(0.0, args.t_max, args.points))
    sol = solve_transient(params, grid, args.tol)
    header = ["t"] + [f"P_{j}" for j in range(params.n)] + ["cdf", "density"]
    rows = (
        [fmt(t)] + [fmt(p) for p in probs] + [fmt(f), fmt(d)]
        for t, probs, f, d in zip(grid.points, sol.probs, sol.absorbed, sol.density)
    )
    _emit_with_manifest(_csv_bytes(header, rows), args.out, args)
    return EXIT_OK


def cmd_laplace(args) -> int:
    params = _params(args)
    header = ["s"] + [f"phi_{j}" for j in range(params.n)] + ["lst_tau", "q1", "q2"]
    if args.method == "both":
        header.append("max_rel_discrepancy")
    rows = []
    for s in args.s:
        extra = []
        if args.method == "closed":
            ev = phi_closed_form(params, s)
            phi, roots = ev.phi, ev.roots
        else:
            phi = phi_tridiagonal(params, s).phi
            roots = char_roots(params, s) if args.method == "both" else None
            if args.method == "both":
                try:
                    closed = phi_closed_form(params, s).phi
                    extra = [fmt(np.max(np.abs(closed - phi) / np.abs(phi)))]
                except NumericalDomainError:
                    extra = [""]
        qcols = [fmt(roots.q1), fmt(roots.q2)] if roots is not None else ["", ""]
        rows.append([fmt(s)] + [fmt(p) for p in phi] + [fmt(params.lam * phi[-1])] + qcols + extra)
    _emit_with_manifest(_csv_bytes(header, rows), args.out, args)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params(args)
    result = run_trials(SimulationConfig(params, args.trials, args.seed, args.method), threads=args.threads)
    data = _csv_bytes(["trial_index", "tau"], ([i, fmt(x)] for i, x in enumerate(result.samples)))
    summary = {
        "mean": result.sample_mean,
        "variance": result.sample_variance,
        "trials": result.trials,
        "seed": result.seed,
        "method": result.method,
        "ks_vs_analytic": ks_vs_lifetime_cdf(result.sorted_samples(), params),
        "manifest": _manifest(args, _sha256(data)),
    }
    _emit(data, args.out)
    _emit(_json_bytes(summary), args.summary or _sibling(args.out, ".summary.json"))
    return EXIT_OK


def cmd_converge(args) -> int:
    for flag, dest in (("--n", "n"), ("--lambda", "lam"), ("--mu", "mu")):
        if getattr(args, dest) is None:
            raise ParameterError(f"missing required parameter {flag}")
    validate_params(args.n, args.lam, min(args.mu))
    report = convergence_sweep(
        args.n, args.lam, args.mu, args.trials, args.seed,
        s_grid=args.s_grid, method=args.method, threads=args.threads,
    )
    header = ["t", "limit_cdf"] + [f"cdf_mu={fmt(mu)}" for mu in report.mu_values]
    limit = -np.expm1(-report.lam * report.t_grid)
    rows = (
        [fmt(t), fmt(lim)] + [fmt(c) for c in cdfs]
        for t, lim, cdfs in zip(report.t_grid, limit, report.analytic_cdfs.T)
    )
    table = _csv_bytes(header, rows)
    body = {
        "n": report.n,
        "lambda": report.lam,
        "trials": report.trials,
        "seed": report.seed,
        "method": args.method,
        "s_grid": report.s_grid.tolist(),
        "results": [
            {
                "mu": float(mu),
                "epsilon": float(eps),
                "scale": float(scale),
                "lst_sup_error": float(lst),
                "ks_analytic": float(ks_a),
                "ks_montecarlo": float(ks_m),
                "ks_mc_vs_analytic": float(ks_x),
            }
            for mu, eps, scale, lst, ks_a, ks_m, ks_x in zip(
                report.mu_values, report.epsilons, report.scales, report.lst_errors,
                report.ks_analytic, report.ks_montecarlo, report.ks_mc_vs_analytic,
            )
        ],
    }
    body["manifest"] = _manifest(args, _sha256(_json_bytes(body) + table))
    _emit(_json_bytes(body), args.out)
    _emit(table, args.csv or _sibling(args.out, ".csv"))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "laplace": cmd_laplace, "simulate": cmd_simulate, "converge": cmd_converge}


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(args, argv, parser, subparsers)
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalDomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
