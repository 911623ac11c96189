"""Command-line entry point.

Exit codes are the contract: 0 success, 1 usage error, 2 whenever a
checked inequality fails, so CI pipelines can gate on the mathematics.
Every subcommand prints one JSON envelope (schema_version, manifest,
report) to stdout and optionally writes it to --out.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__, brownian, figures, montecarlo, pressure, report
from ._rng import derive_seed, level_stream
from .skorokhod import StepFunction, sup_norm, theta, theta_inverse
from .symbolic import Alphabet, MAdicRational, all_words, t_of, word_to_string
from .transfer import (TransferOperator, build_potential, pathwise_bounds,
                       power_iterate, ratio_representation)

_USAGE_EXIT = 1
_VIOLATION_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for bound
    # violations, so remap
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(_USAGE_EXIT)


def _emit(args, manifest: dict, rep: dict) -> None:
    text = report.dumps_envelope(manifest, rep)
    sys.stdout.write(text)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _config_dict(args, skip=("func", "subcommand")) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or callable(v):
            continue
        cfg[k] = v
    return cfg


def _outputs(args, *paths) -> list[str]:
    out = [p for p in paths if p]
    if getattr(args, "out", None):
        out.append(args.out)
    return out


def _alphabet(args) -> Alphabet:
    return Alphabet(args.alphabet)


def _resolved_beta(args) -> float:
    # --zero-noise makes the potential vanish; an explicit --beta is inert
    if getattr(args, "zero_noise", False) and args.beta is not None:
        sys.stderr.write("warning: --beta has no effect with --zero-noise\n")
    return 1.0 if args.beta is None else args.beta


def _cmd_sample_path(args) -> int:
    grid = brownian.sample(args.level, _alphabet(args), args.seed,
                           zero_noise=args.zero_noise)
    st = brownian.stats(grid, args.gamma)
    csv_path = args.csv
    if csv_path:
        n = grid.values.size - 1
        rows = [(k, k / n, float(v)) for k, v in enumerate(grid.values)]
        report.write_csv(csv_path, ["k", "t", "value"], rows)
    rep = {
        "level": args.level,
        "alphabet": args.alphabet,
        "seed": args.seed,
        "zero_noise": bool(args.zero_noise),
        "b1": float(grid.values[-1]),
        "stats": {
            "max": st.max, "min": st.min, "integral": st.integral,
            "holder_constant": st.holder_constant, "gamma": st.gamma,
        },
    }
    manifest = report.build_manifest("sample-path", _config_dict(args),
                                     __version__, _outputs(args, csv_path))
    _emit(args, manifest, rep)
    return 0


def _cmd_spectrum(args) -> int:
    beta = _resolved_beta(args)
    alphabet = _alphabet(args)
    grid = brownian.sample(args.level, alphabet, args.seed,
                           zero_noise=args.zero_noise)
    L = TransferOperator(build_potential(grid, beta))
    res = power_iterate(L)
    ratio = ratio_representation(L, res, grid)
    gap = abs(ratio - res.eigenvalue) / res.eigenvalue
    bounds = pathwise_bounds(L, res, grid)
    if args.emit_eigenfunction:
        words = all_words(args.level, alphabet)
        rows = [(word_to_string(w), t_of(w).value, float(h))
                for w, h in zip(words, res.h.values)]
        report.write_csv(args.emit_eigenfunction, ["word", "t", "h"], rows)
    rep = {
        "lambda": res.eigenvalue,
        "log_lambda": res.log_eigenvalue,
        "iterations": res.iterations,
        "residual": res.residual,
        "converged": res.converged,
        "ratio_identity_gap": gap,
        "ratio_point": str(MAdicRational(1, 1, alphabet.m)),
        "pathwise_bounds": bounds,
    }
    manifest = report.build_manifest(
        "spectrum", _config_dict(args), __version__,
        _outputs(args, args.emit_eigenfunction))
    _emit(args, manifest, rep)
    bad = (not res.converged or not bounds["lower_ok"]
           or not bounds["upper_ok"] or not res.eigenvalue > 1.0)
    return _VIOLATION_EXIT if bad else 0


def _cmd_isometry_check(args) -> int:
    alphabet = _alphabet(args)
    m, n = alphabet.m, args.level
    worst = 0.0
    failures = 0
    for trial in range(args.trials):
        g = level_stream(derive_seed(args.seed, trial), 0)
        Fv, Gv = g.standard_normal((2, m**n))
        a, b = g.standard_normal(2)
        F = StepFunction(n, alphabet, Fv, float(Fv[-1]))
        G = StepFunction(n, alphabet, Gv, float(Gv[-1]))
        f = theta(F)
        worst = max(worst, abs(sup_norm(F) - sup_norm(f)))
        back = theta_inverse(f)
        if not (np.array_equal(back.right_values, F.right_values)
                and back.terminal_value == F.terminal_value):
            failures += 1
        combo = StepFunction(n, alphabet, a * Fv + b * Gv,
                             float(a * Fv[-1] + b * Gv[-1]))
        if not np.array_equal(theta(combo).values,
                              a * theta(F).values + b * theta(G).values):
            failures += 1
    rep = {
        "level": n,
        "alphabet": m,
        "trials": args.trials,
        "max_norm_discrepancy": worst,
        "roundtrip_failures": failures,
    }
    manifest = report.build_manifest("isometry-check", _config_dict(args),
                                     __version__, _outputs(args))
    _emit(args, manifest, rep)
    return _VIOLATION_EXIT if (worst != 0.0 or failures) else 0


def _cmd_pressure(args) -> int:
    alphabet = _alphabet(args)
    samples = []
    n_failed = 0
    first_birkhoff = None
    for i in range(args.replicas):
        seed = derive_seed(args.seed, i)
        grid = brownian.sample(args.level, alphabet, seed)
        L = TransferOperator(build_potential(grid, args.beta))
        res = power_iterate(L)
        if not res.converged:
            n_failed += 1
            continue
        s = pressure.pressure_sample(L, res, grid, kmax=args.kmax)
        if first_birkhoff is None:
            first_birkhoff = s.birkhoff
        samples.append(s)
    if not samples:
        sys.stderr.write("error: all replicas failed to converge\n")
        return _VIOLATION_EXIT
    rep = pressure.quenched_report(samples, alphabet)
    rep["n_failed"] = n_failed
    if args.emit_birkhoff and first_birkhoff is not None:
        rows = [(k + 1, float(v)) for k, v in enumerate(first_birkhoff)]
        report.write_csv(args.emit_birkhoff, ["k", "value"], rows)
    manifest = report.build_manifest(
        "pressure", _config_dict(args), __version__,
        _outputs(args, args.emit_birkhoff))
    _emit(args, manifest, rep)
    bad = (not rep["jensen_ok"] or not rep["bounds_ok"]
           or not rep["all_positive"] or rep["variational_violations"] > 0)
    return _VIOLATION_EXIT if bad else 0


def _cmd_montecarlo(args) -> int:
    import time
    config = montecarlo.ReplicaConfig(
        level=args.level, alphabet=_alphabet(args), beta=args.beta,
        master_seed=args.seed, replicas=args.replicas)
    t0 = time.perf_counter()
    rows = montecarlo.run_replicas(config, args.workers)
    mc = montecarlo.aggregate(config, rows, time.perf_counter() - t0)
    tight = montecarlo.tightened_upper_check(config, rows=rows)
    if args.csv:
        report.write_csv(
            args.csv, ["seed", "lambda", "log_lambda", "M1", "B1"],
            [(r.seed, r.eigenvalue, r.log_eigenvalue, r.m1, r.b1) for r in rows])
    rep = mc.to_dict()
    violations = rep["bound_violations"]
    rep["bounds_ok"] = bool(sum(violations.values()) == 0 and mc.n_failed == 0)
    if args.beta == 1.0:
        lo = math.exp(0.5)
        band_ok = (lo <= mc.mean_lambda <= tight["band_upper"]
                   and tight["tightened_bound_ok"])
        rep["expectation_band_ok"] = bool(band_ok)
    else:
        rep["expectation_band_ok"] = None
    rep["tightened"] = tight
    manifest = report.build_manifest("montecarlo", _config_dict(args),
                                     __version__, _outputs(args, args.csv))
    _emit(args, manifest, rep)
    bad = not rep["bounds_ok"] or rep["expectation_band_ok"] is False
    return _VIOLATION_EXIT if bad else 0


def _cmd_refine_study(args) -> int:
    try:
        levels = [int(x) for x in args.levels.split(",")]
    except ValueError:
        sys.stderr.write("error: --levels must be a comma-separated integer list\n")
        return _USAGE_EXIT
    config = montecarlo.ReplicaConfig(
        level=levels[0], alphabet=_alphabet(args), beta=args.beta,
        master_seed=args.seed, replicas=args.replicas)
    rep = montecarlo.refinement_study(config, levels, args.workers)
    manifest = report.build_manifest("refine-study", _config_dict(args),
                                     __version__, _outputs(args))
    _emit(args, manifest, rep)
    return 0 if rep["decreasing"] else _VIOLATION_EXIT


def _read_columns(path: str, wanted: list[str]) -> list[list[float]]:
    header, rows = report.read_csv(path)
    try:
        idx = [header.index(c) for c in wanted]
        cols = [[float(row[i]) for i in idx] for row in rows]
    except (ValueError, IndexError) as e:
        raise ValueError(f"malformed CSV {path}: {e}") from None
    if not cols:
        raise ValueError(f"malformed CSV {path}: no data rows")
    return [list(c) for c in zip(*cols)]


def _cmd_plot(args) -> int:
    try:
        if args.kind == "path":
            t, v = _read_columns(args.input, ["t", "value"])
            svg = figures.path_svg(t, v)
            points = len(t)
        elif args.kind == "histogram":
            lams, m1s = _read_columns(args.input, ["lambda", "M1"])
            svg = figures.histogram_svg(lams, m1s)
            points = len(lams)
        else:
            k, v = _read_columns(args.input, ["k", "value"])
            svg = figures.birkhoff_svg(k, v)
            points = len(k)
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return _USAGE_EXIT
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    rep = {"kind": args.kind, "input": args.input, "points": points}
    manifest = report.build_manifest("plot", _config_dict(args), __version__,
                                     [args.out])
    text = report.dumps_envelope(manifest, rep)
    sys.stdout.write(text)
    return 0


def _add_common(p, *, beta_default=1.0, beta_sentinel=False):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--alphabet", type=int, default=2, metavar="M",
                   help="alphabet size m (default 2)")
    p.add_argument("--out", metavar="FILE", help="also write the JSON report here")
    if beta_sentinel:
        p.add_argument("--beta", type=float, default=None,
                       help="potential scale (default 1)")
    elif beta_default is not None:
        p.add_argument("--beta", type=float, default=beta_default,
                       help="potential scale (default 1)")


def build_parser() -> _Parser:
    root = _Parser(prog="ruelle-rand",
                   description="Transfer-operator spectra, quenched pressure, "
                               "and Monte Carlo for Brownian random potentials "
                               "on full shift spaces.")
    root.add_argument("--version", action="version", version=__version__)
    sub = root.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p = sub.add_parser("sample-path", help="simulate one Brownian grid path")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--zero-noise", action="store_true")
    p.add_argument("--gamma", type=float, default=0.4,
                   help="Holder exponent for stats (default 0.4)")
    p.add_argument("--csv", metavar="FILE", help="grid CSV (k, t, value)")
    _add_common(p, beta_default=None)
    p.set_defaults(func=_cmd_sample_path)

    p = sub.add_parser("spectrum", help="Perron eigendata for one sampled potential")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--zero-noise", action="store_true")
    p.add_argument("--emit-eigenfunction", metavar="FILE",
                   help="CSV of (word, t, h)")
    _add_common(p, beta_sentinel=True)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("isometry-check",
                       help="step-function/cylinder correspondence checks")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    _add_common(p, beta_default=None)
    p.set_defaults(func=_cmd_isometry_check)

    p = sub.add_parser("pressure", help="quenched pressure over replicas")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--replicas", type=int, default=256)
    p.add_argument("--kmax", type=int, default=32,
                   help="Birkhoff iterate depth per sample (default 32)")
    p.add_argument("--emit-birkhoff", metavar="FILE",
                   help="CSV (k, value) of the first replica's iterates")
    _add_common(p)
    p.set_defaults(func=_cmd_pressure)

    p = sub.add_parser("montecarlo", help="replica study of the eigenvalue law")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--replicas", type=int, default=1024)
    p.add_argument("--workers", type=int, default=None,
                   help=f"parallel workers (default ${montecarlo.WORKERS_ENV} or 1)")
    p.add_argument("--csv", metavar="FILE",
                   help="per-replica CSV (seed, lambda, log_lambda, M1, B1)")
    _add_common(p)
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("refine-study", help="eigenvalue drift across depths")
    p.add_argument("--levels", default="6,8,10,12",
                   help="comma-separated ascending levels")
    p.add_argument("--replicas", type=int, default=256)
    p.add_argument("--workers", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_refine_study)

    p = sub.add_parser("plot", help="deterministic SVG from a sibling CSV")
    p.add_argument("--input", required=True, metavar="CSV")
    p.add_argument("--kind", required=True, choices=["path", "histogram", "birkhoff"])
    p.add_argument("--out", required=True, metavar="SVG")
    p.set_defaults(func=_cmd_plot)

    return root


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return _USAGE_EXIT
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return _USAGE_EXIT


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
