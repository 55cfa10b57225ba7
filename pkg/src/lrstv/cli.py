"""Command-line front end: fixture, simulate, denoise, eval, analyze.

Exit codes
----------
0  success (for ``denoise``: the stopping rule was met)
1  runtime error (bad input file, invalid parameter value, ...)
2  usage error (unknown flag, malformed argument)
3  ``denoise`` stopped at ``--max-iters`` without meeting the stopping rule
"""
import argparse
import logging
import sys
from dataclasses import asdict

import numpy as np

from . import __version__, analysis, io, metrics, noise
from .fixtures import STANDARD_SHAPE, synthetic_cube
from .solver import SSTV_BASELINE, TDLRSTV, SolverConfig, solve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

EVAL_COLUMNS = ("band", "psnr", "ssim", "ergas", "sam")

log = logging.getLogger("lrstv")


def _emit_json(obj, path):
    if path:
        io.write_json(obj, path)
    else:
        io.dump_json(obj, sys.stdout)


def _report(ref, test):
    if min(ref.shape[:2]) < metrics.SSIM_WIN:
        raise ValueError(f"metrics need at least {metrics.SSIM_WIN}x{metrics.SSIM_WIN} pixels")
    return metrics.report(ref, test)


def cmd_fixture(args):
    cube = synthetic_cube(tuple(args.shape), n_endmembers=args.endmembers, seed=args.seed)
    io.write_cube(args.output, cube)
    log.info("wrote %s fixture to %s", cube.shape, args.output)
    return EXIT_OK


def cmd_simulate(args):
    clean = io.read_cube(args.input)
    if args.unit_scale:
        clean = noise.unit_scale(clean)
    if args.spec:
        with open(args.spec) as fh:
            spec = noise.NoiseSpec.from_json(fh.read())
        if args.seed is not None:
            spec = spec.with_seed(args.seed)
    else:
        spec = noise.get_case(args.case, seed=args.seed or 0)
    if args.reference_bands:
        spec = spec.rescaled(clean.shape[2], args.reference_bands)
    noisy = noise.apply_noise(clean, spec)
    io.write_cube(args.output, noisy)
    # score against what the file actually stores
    noisy32 = noisy.astype(np.float32).astype(np.float64)
    out = {"noise_spec": asdict(spec), "metrics": _report(clean, noisy32).to_dict()}
    _emit_json(out, args.report)
    return EXIT_OK


def _validate_denoise(args, shape):
    p = shape[2]
    if not 1 <= args.rank3 <= p:
        raise ValueError(f"--rank3 must lie in [1, {p}] for a cube with {p} bands, got {args.rank3}")
    if args.epsilon <= 0:
        raise ValueError(f"--epsilon must be positive, got {args.epsilon}")
    if args.max_iters < 0:
        raise ValueError(f"--max-iters must be >= 0, got {args.max_iters}")
    if not 0 < args.spatial_rank_ratio <= 1:
        raise ValueError(f"--spatial-rank-ratio must lie in (0, 1], got {args.spatial_rank_ratio}")
    if args.lambda_c < 0:
        raise ValueError(f"--lambda-c must be nonnegative, got {args.lambda_c}")


def cmd_denoise(args):
    obs = io.read_cube(args.input)
    truth = io.read_cube(args.truth) if args.truth else None
    if truth is not None and truth.shape != obs.shape:
        raise ValueError(f"--truth has shape {truth.shape}, input has {obs.shape}")
    _validate_denoise(args, obs.shape)
    alpha = 0.0 if args.method == "sstv" else args.alpha
    scale = float(np.max(np.abs(obs))) or 1.0
    cfg = SolverConfig.for_shape(
        obs.shape, rank3=args.rank3, tau=args.tau, alpha=alpha, lambda_c=args.lambda_c,
        w=tuple(args.w), spatial_rank_ratio=args.spatial_rank_ratio,
        mu0=args.mu0, rho=args.rho, mu_max=args.mu_max,
        epsilon=args.epsilon * scale, max_iters=args.max_iters,
        mode=SSTV_BASELINE if args.method == "sstv" else TDLRSTV,
    )
    log.info("ranks=%s lam=%.4g epsilon=%.3g", cfg.ranks, cfg.weights.lam, cfg.epsilon)
    result = solve(obs, cfg, ground_truth=truth)
    io.write_cube(args.output_l, result.L)
    if args.output_s:
        io.write_cube(args.output_s, result.S)
    if args.trace:
        cols = io.TRACE_TRUTH_COLUMNS if truth is not None else io.TRACE_COLUMNS
        io.export_csv(result.trace, args.trace, cols)

    summary = {
        "converged": result.converged,
        "iterations": len(result.trace),
        "ranks": list(cfg.ranks),
        "lambda": cfg.weights.lam,
        "epsilon": cfg.epsilon,
    }
    if truth is not None:
        restored = result.L.astype(np.float32).astype(np.float64)
        summary["noisy"] = _report(truth, obs).to_dict()
        summary["restored"] = _report(truth, restored).to_dict()
    _emit_json(summary, args.report)
    if not result.converged:
        log.warning("stopped after %d iterations without meeting the stopping rule", len(result.trace))
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def eval_rows(rep):
    """Per-band rows followed by a ``mean`` row carrying the cube-level indices."""
    rows = [{**r, "ergas": None, "sam": None} for r in rep.csv_rows()]
    rows.append({"band": "mean", "psnr": rep.mpsnr, "ssim": rep.mssim,
                 "ergas": rep.ergas, "sam": rep.sam})
    return rows


def cmd_eval(args):
    ref = io.read_cube(args.ref)
    test = io.read_cube(args.test)
    if ref.shape != test.shape:
        raise ValueError(f"dimension mismatch: --ref {ref.shape} vs --test {test.shape}")
    rep = _report(ref, test)
    if args.format == "csv":
        if not args.output:
            raise ValueError("--format csv needs --output")
        io.export_csv(eval_rows(rep), args.output, EVAL_COLUMNS)
    else:
        _emit_json(rep.to_dict(), args.output)
    return EXIT_OK


def cmd_analyze(args):
    out = {}
    if args.input:
        cube = io.read_cube(args.input)
        spectra = analysis.gradient_spectra(cube)
        if args.spectra:
            io.export_csv(analysis.spectra_records(spectra), args.spectra, io.SPECTRA_COLUMNS)
        out["effective_rank"] = {
            f"{domain}_{n}": analysis.effective_rank(v, args.threshold)
            for (n, domain), v in sorted(spectra.items())
        }
        if args.histogram:
            rows = []
            for n, (counts, edges) in analysis.gradient_histogram(cube, args.bins).items():
                rows.extend(
                    {"direction": n, "left": float(lo), "right": float(hi), "count": int(c)}
                    for c, lo, hi in zip(counts, edges[:-1], edges[1:])
                )
            io.export_csv(rows, args.histogram, ("direction", "left", "right", "count"))
    elif args.spectra or args.histogram:
        raise ValueError("--spectra and --histogram need --input")
    if args.verify:
        out["verification"] = analysis.verify_rank_properties(args.verify, seed=args.seed).to_dict()
    if not out:
        raise ValueError("nothing to do: give --input and/or --verify")
    _emit_json(out, args.report)
    if "verification" in out and not out["verification"]["all_passed"]:
        return EXIT_ERROR
    return EXIT_OK


class _HelpFormatter(argparse.HelpFormatter):
    """Append the default to every option that has a meaningful one."""

    def _get_help_string(self, action):
        text = action.help or ""
        if action.default in (None, False, argparse.SUPPRESS) or "default" in text or not action.option_strings:
            return text
        return f"{text} (default: %(default)s)".lstrip()


def build_parser():
    fmt = _HelpFormatter
    parser = argparse.ArgumentParser(
        prog="lrstv", description=__doc__.splitlines()[0], epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", help="write the synthetic test cube", formatter_class=fmt)
    p.add_argument("--output", required=True, help="cube file to write")
    p.add_argument("--shape", type=int, nargs=3, default=list(STANDARD_SHAPE), metavar=("M", "N", "P"),
                   help="cube dimensions")
    p.add_argument("--endmembers", type=int, default=4, help="number of mixed spectra")
    p.add_argument("--seed", type=int, default=0, help="fixture seed")
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("simulate", help="add a benchmark noise case to a clean cube", formatter_class=fmt)
    p.add_argument("--input", required=True, help="clean cube, values in [0, 1]")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--case", type=int, help="benchmark case id 1..9")
    src.add_argument("--spec", help="NoiseSpec JSON file")
    p.add_argument("--seed", type=int, default=None,
                   help="noise seed (default 0 for --case, the spec's own seed for --spec)")
    p.add_argument("--reference-bands", type=int, default=noise.REFERENCE_BANDS,
                   help="band count the structured-noise intervals refer to; they are mapped "
                        "proportionally onto the input's bands (0 = use them as given)")
    p.add_argument("--unit-scale", action="store_true", help="min-max scale the input to [0, 1] first")
    p.add_argument("--output", required=True, help="noisy cube to write")
    p.add_argument("--report", help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("denoise", help="restore a noisy cube", formatter_class=fmt)
    p.add_argument("--input", required=True, help="noisy cube")
    p.add_argument("--output-l", required=True, help="restored (low-rank) cube to write")
    p.add_argument("--output-s", help="sparse-noise cube to write")
    p.add_argument("--method", choices=("tdlrstv", "sstv"), default="tdlrstv",
                   help="sstv drops the low-rank gradient term (same as --alpha 0)")
    p.add_argument("--tau", type=float, default=0.01, help="l1 gradient weight")
    p.add_argument("--alpha", type=float, default=0.3, help="gradient nuclear-norm weight")
    p.add_argument("--lambda-c", type=float, default=10.0, help="sparse weight is C / sqrt(m n)")
    p.add_argument("--rank3", type=int, default=3, help="spectral Tucker rank")
    p.add_argument("--spatial-rank-ratio", type=float, default=0.8,
                   help="spatial Tucker ranks are ceil(ratio * m), ceil(ratio * n)")
    p.add_argument("--w", type=float, nargs=3, default=[1.0, 1.0, 1.0], metavar=("W1", "W2", "W3"),
                   help="per-direction difference weights")
    p.add_argument("--epsilon", type=float, default=1e-6, help="stopping tolerance relative to max|input|")
    p.add_argument("--max-iters", type=int, default=100, help="iteration cap")
    p.add_argument("--mu0", type=float, default=1e-2, help="initial penalty")
    p.add_argument("--rho", type=float, default=1.5, help="penalty growth factor, > 1")
    p.add_argument("--mu-max", type=float, default=1e8, help="penalty ceiling")
    p.add_argument("--trace", help="per-iteration CSV")
    p.add_argument("--truth", help="clean cube; adds PSNR/SSIM to the trace and report")
    p.add_argument("--report", help="JSON summary path (default: stdout)")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("eval", help="quality indices of a test cube against a reference", formatter_class=fmt)
    p.add_argument("--ref", required=True, help="reference (clean) cube")
    p.add_argument("--test", required=True, help="cube to score")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    p.add_argument("--output", help="output path (default: stdout, json only)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="gradient spectra and rank-inequality checks", formatter_class=fmt)
    p.add_argument("--input", help="cube whose gradient maps are analysed")
    p.add_argument("--spectra", help="CSV of normalised singular values")
    p.add_argument("--threshold", type=float, default=0.01, help="effective-rank cutoff")
    p.add_argument("--histogram", help="CSV of gradient-value histograms")
    p.add_argument("--bins", type=int, default=64, help="histogram bins")
    p.add_argument("--verify", type=int, default=0, metavar="TRIALS",
                   help="random instances for the rank checks (0 = skip)")
    p.add_argument("--seed", type=int, default=0, help="seed for the rank checks")
    p.add_argument("--report", help="JSON report path (default: stdout)")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"lrstv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
