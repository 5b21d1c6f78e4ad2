"""Command-line front end: ``qsysid <subcommand> ...``.

Exit status: 0 on success, 1 when estimation fails (diagnostics are written
as JSON), 2 on usage errors and malformed input.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys

import numpy as np

from . import bayes, io
from .bench import BenchmarkConfig, records_to_csv, run_benchmark
from .errors import EstimationFailedError, InputFormatError, InsufficientDataError, UndefinedLikelihoodError
from .estimator import EstimatorConfig, default_search_range, estimate
from .identifiability import common_blocks, gauge_transform, max_trace_deviation, shift_hamiltonian
from .model import ModelParams, params_from_couplings
from .sampling import make_grid
from .simulator import exact_trace, simulate_trace
from .spectral import power_spectrum


class UsageError(Exception):
    pass


def _seed(args):
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _params(args):
    if args.omega is not None:
        if args.omega1 is not None or args.omega2 is not None:
            raise UsageError("give either --omega/--alpha or --omega1/--omega2")
        if args.alpha is None:
            raise UsageError("--omega needs --alpha")
        return ModelParams(args.omega, args.alpha)
    if args.omega1 is None or args.omega2 is None:
        raise UsageError("give --omega and --alpha, or --omega1 and --omega2")
    return params_from_couplings(args.omega1, args.omega2)


def cmd_simulate(args):
    params = _params(args)
    seed = _seed(args)
    grid = make_grid(args.mode, args.T, args.nt, seed)
    if args.noiseless:
        data = exact_trace(params, grid)
    else:
        data = simulate_trace(
            params, grid, seed, args.snr, args.max_shots, args.batch, fixed_shots=args.fixed_shots
        )
    io.write_data(args.output, data)
    return 0


def cmd_spectrum(args):
    data = io.read_data(args.input, args.T)
    spec = power_spectrum(data)
    io.write_columns(args.output, ["omega", "F"], [spec.omegas.tolist(), spec.values.tolist()])
    return 0


def cmd_likelihood(args):
    data = io.read_data(args.input, args.T)
    lo, hi = default_search_range(data)
    lo = args.omega_min if args.omega_min is not None else lo
    hi = args.omega_max if args.omega_max is not None else hi
    step = args.step if args.step is not None else np.pi / (8.0 * data.span)
    if not (0 <= lo < hi and step > 0):
        raise UsageError("need 0 <= --omega-min < --omega-max and --step > 0")
    n = int(np.ceil((hi - lo) / step))
    omegas = lo + (hi - lo) * np.arange(n + 1) / n
    omegas = omegas[omegas > 0]
    prof = bayes.likelihood_profile(omegas, data)
    io.write_columns(args.output, ["omega", "logP"], [prof.omegas.tolist(), prof.values.tolist()])
    return 0


def cmd_estimate(args):
    data = io.read_data(args.input, args.T)
    cfg = EstimatorConfig(
        delta_omega=args.delta_omega,
        ambiguity_tau=args.tau,
        omega_range=tuple(args.omega_range) if args.omega_range else None,
    )
    try:
        result = estimate(data, cfg)
    except EstimationFailedError as exc:
        _emit(io.dump_json({"error": str(exc), "diagnostics": exc.diagnostics}), args.output)
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 1
    _emit(io.dump_json(result.to_dict()), args.output)
    return 0


def cmd_benchmark(args):
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{args.config}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise InputFormatError(f"{args.config}: config must be a JSON object")
    if "seed" not in raw:
        raw["seed"] = _seed(args)
    try:
        cfg = BenchmarkConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise InputFormatError(f"{args.config}: {exc}") from None
    records, summary = run_benchmark(cfg, workers=args.workers)
    _emit(records_to_csv(records), args.output)
    if args.summary:
        _emit(io.dump_json(summary), args.summary)
    return 0


def cmd_identify(args):
    spec, extras = io.read_system(args.input)
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    tol = extras.get("tol", 1e-12)
    check_tol = args.check_tol
    times = extras.get("times")
    if times is None:
        times = np.sort(rng.uniform(0.0, args.horizon, args.n_times))
    blocks = common_blocks(spec, tol)
    lambdas = rng.uniform(-5.0, 5.0, len(blocks))
    shifted = shift_hamiltonian(spec.H, blocks, lambdas, tol)
    phases = rng.uniform(0.0, 2.0 * np.pi, spec.dimension - 1)
    lambda0 = float(rng.uniform(-5.0, 5.0))
    gauged = gauge_transform(spec.H, phases, lambda0)
    dev_shift = max_trace_deviation(spec, spec.H, shifted, times)
    dev_gauge = max_trace_deviation(spec, spec.H, gauged, times)
    out = {
        "seed": seed,
        "dimension": spec.dimension,
        "tol": tol,
        "n_times": int(len(times)),
        "blocks": [list(b) for b in blocks],
        "block_shift": {
            "lambdas": lambdas.tolist(),
            "max_deviation": dev_shift,
            "indistinguishable": dev_shift <= check_tol,
        },
        "gauge": {
            "phases": phases.tolist(),
            "lambda0": lambda0,
            "max_deviation": dev_gauge,
            "indistinguishable": dev_gauge <= check_tol,
        },
    }
    if "H_alt" in extras:
        dev = max_trace_deviation(spec, spec.H, extras["H_alt"], times)
        out["comparison"] = {"max_deviation": dev, "indistinguishable": dev <= check_tol}
    _emit(io.dump_json(out), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsysid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a p11 trace and write t,d,shots CSV")
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--omega1", type=float)
    p.add_argument("--omega2", type=float)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--mode", choices=["uniform", "stratified"], default="uniform")
    p.add_argument("--seed", type=int)
    p.add_argument("--noiseless", action="store_true", help="write exact p11 values, no shots column")
    p.add_argument("--snr", type=float, default=10.0)
    p.add_argument("--max-shots", type=int, default=10_000)
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--fixed-shots", type=int, help="fixed repetitions per point instead of the adaptive rule")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    for name, func, help_ in (
        ("spectrum", cmd_spectrum, "write the rescaled power spectrum as omega,F CSV"),
        ("likelihood", cmd_likelihood, "write the log-likelihood profile as omega,logP CSV"),
        ("estimate", cmd_estimate, "estimate (Omega, alpha) and write JSON"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-i", "--input", required=True)
        p.add_argument("-o", "--output", required=name != "estimate")
        p.add_argument("--T", type=float, help="observation window (inferred from the times if omitted)")
        if name == "likelihood":
            p.add_argument("--omega-min", type=float)
            p.add_argument("--omega-max", type=float)
            p.add_argument("--step", type=float)
        if name == "estimate":
            p.add_argument("--delta-omega", type=float)
            p.add_argument("--tau", type=float)
            p.add_argument("--omega-range", type=float, nargs=2, metavar=("LO", "HI"))
        p.set_defaults(func=func)

    p = sub.add_parser("benchmark", help="run a campaign from a JSON config")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--output", required=True, help="records CSV")
    p.add_argument("--summary", help="summary JSON")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, help="master seed when the config has none")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("identify", help="block structure and indistinguishability checks")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-times", type=int, default=100)
    p.add_argument("--horizon", type=float, default=100.0)
    p.add_argument("--check-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_identify)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, InputFormatError, InsufficientDataError, UndefinedLikelihoodError, ValueError, OSError) as exc:
        print(f"qsysid {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
