"""Command line front end.

One binary, eight subcommands, every run reproducible from its seed.  Each
invocation writes a CSV (or JSON) table plus a JSON manifest recording the
subcommand, parameters, seed, build id, timestamps, and output files.  The
table body is a pure function of the arguments, so reruns are byte-identical;
wall-clock data lives only in the manifest.

Exit codes: 0 success, 1 usage or runtime error, 2 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .dyck import (
    beta_sum,
    expected_k_functional,
    max_level_tail,
    stay_above_full_window_expectation,
)
from .ensemble import RNG_ALGORITHM, DistributionError, parse_distribution
from .gluing import (
    catalan_convolution_ratio,
    cycle_refined_insertion_sum,
    distance_two_tail_log,
    log_trace_excess_ratio,
    mixed_parity_reduction_bound,
    multi_walk_contribution_bound,
    power_sum_ratio,
    run_invariant_suite,
    single_walk_contribution_bound,
    typed_vertex_contribution_log,
    verify_catalan_convolution,
)
from .paths import (
    even_path_contribution,
    exact_expected_trace,
    exact_expected_trace_patterns,
    odd_path_contribution,
)
from .spectral import (
    concentration_experiment,
    edge_exceedance_experiment,
    largest_eigenvalue,
    mc_expected_trace,
    sample_symmetric_matrix,
    spectral_norm,
    wigner_trace_prediction,
    wigner_trace_prediction_refined,
)


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors exiting 1 instead of 2; exit 2 is reserved
    for invariant-suite failures."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def _build_id() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"tml-{__version__}"


def _output_dir(args) -> str:
    out = getattr(args, "output_dir", None) or os.environ.get("TML_OUTPUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_table(args, header: list[str], rows: list[list]) -> list[str]:
    """Write the rows in the chosen format; returns the written file paths."""
    out_dir = _output_dir(args)
    base = args.out or args.subcommand
    if args.format == "json":
        path = os.path.join(out_dir, f"{base}.json")
        payload = [dict(zip(header, row)) for row in rows]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return [path]
    path = os.path.join(out_dir, f"{base}.csv")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return [path]


def _write_manifest(args, outputs: list[str], started: str, finished: str) -> str:
    out_dir = _output_dir(args)
    base = args.out or args.subcommand
    params = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("subcommand", "func") and v is not None
    }
    manifest = {
        "subcommand": args.subcommand,
        "parameters": {k: _fmt(v) for k, v in params.items()},
        "seed": getattr(args, "seed", None),
        "build_id": _build_id(),
        "started": started,
        "finished": finished,
        "output_files": [os.path.basename(p) for p in outputs],
        "rng": RNG_ALGORITHM,
    }
    path = os.path.join(out_dir, f"{base}.manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _default_threads() -> int:
    return os.cpu_count() or 1


# ---------- subcommand handlers: return (header, rows, exit_code) ----------


def _cmd_trace_mc(args):
    dist = parse_distribution(args.dist)
    est = mc_expected_trace(
        dist,
        args.n,
        args.s,
        args.trials,
        args.seed,
        normalized=not args.raw,
        method=args.method,
        threads=args.threads,
    )
    header = ["n", "s", "trials", "seed", "mean", "stderr", "prediction", "prediction_refined"]
    rows = [
        [
            args.n,
            args.s,
            args.trials,
            args.seed,
            est.mean,
            est.stderr,
            wigner_trace_prediction(args.n, args.s, dist.sigma),
            wigner_trace_prediction_refined(args.n, args.s, dist.sigma),
        ]
    ]
    return header, rows, 0


def _cmd_trace_exact(args):
    dist = parse_distribution(args.dist)
    route = args.route
    if route == "auto":
        route = "full" if args.n ** (2 * args.s) <= 10**7 else "patterns"
    if route == "patterns":
        value = exact_expected_trace_patterns(dist, args.n, args.s)
        even = exact_expected_trace_patterns(dist, args.n, args.s, even_only=True)
    else:
        value = exact_expected_trace(dist, args.n, args.s)
        even = even_path_contribution(dist, args.n, args.s)
    header = ["n", "s", "route", "value", "even_part", "odd_part"]
    rows = [[args.n, args.s, route, value, even, value - even]]
    return header, rows, 0


def _cmd_spectrum(args):
    dist = parse_distribution(args.dist)
    header = ["trial", "seed", "lambda_max", "spectral_norm"]
    rows = []
    for i in range(args.trials):
        sample = sample_symmetric_matrix(dist, args.n, args.seed + i)
        a = sample.normalized_view
        rows.append([i, args.seed + i, largest_eigenvalue(a), spectral_norm(a)])
    return header, rows, 0


def _cmd_edge_exceed(args):
    dist = parse_distribution(args.dist)
    result = edge_exceedance_experiment(
        dist, args.n, args.trials, args.epsilon, args.seed, threads=args.threads
    )
    header = ["trial", "lambda_max", "threshold", "exceeded"]
    rows = [
        [i, v, result.threshold, v > result.threshold]
        for i, v in enumerate(result.lambda_max_values)
    ]
    print(
        f"n={args.n} trials={args.trials} threshold={result.threshold:.6f} "
        f"exceed_fraction={result.exceed_fraction:.4f}"
    )
    return header, rows, 0


def _cmd_concentration(args):
    dist = parse_distribution(args.dist)
    t_values = [float(t) for t in args.t_values.split(",") if t]
    rows_out = concentration_experiment(
        dist, args.n, args.trials, t_values, args.seed, threads=args.threads
    )
    header = ["t", "deviation", "empirical_fraction", "bound"]
    rows = [[r.t, r.deviation, r.empirical_fraction, r.bound] for r in rows_out]
    return header, rows, 0


def _cmd_verify_gluing(args):
    report = run_invariant_suite(
        args.n,
        args.s,
        exhaustive=not args.skip_exhaustive,
        random_walks=args.random,
        seed=args.seed,
    )
    header = ["odd_pairs", "run_count", "walk_count", "cycle_count", "outcome", "count"]
    rows = [[*key, count] for key, count in report.histogram.items()]
    print(f"checked {report.walks_checked} walks, {len(report.violations)} violations")
    for tag, verts in report.violations[:10]:
        print(f"violation {tag}: {verts}", file=sys.stderr)
    return header, rows, 0 if report.ok else 2


def _cmd_bounds_table(args):
    s, n = args.s, args.n
    sigma, bound_k = args.sigma, args.entry_bound
    rows: list[list] = []

    def safe_log(x: float) -> float:
        return math.log(x) if x > 0.0 else -math.inf

    def put(family: str, parameter, log_value: float):
        try:
            value = math.exp(log_value)
        except OverflowError:
            value = math.inf
        rows.append([family, parameter, log_value, value])

    single = single_walk_contribution_bound(s, n, sigma, bound_k, prefactor=args.prefactor)
    multi = multi_walk_contribution_bound(s, n, sigma, bound_k, prefactor=max(1.0, args.prefactor))
    for l, lv in enumerate(single.log_terms, start=1):
        put("single-walk", l, lv)
    put("single-walk", "total", single.log_total)
    put("single-walk-excess-ratio", "total", log_trace_excess_ratio(single, s, n, sigma))
    for l, lv in enumerate(multi.log_terms, start=1):
        put("multi-walk", l, lv)
    put("multi-walk", "total", multi.log_total)
    put("multi-walk-excess-ratio", "total", log_trace_excess_ratio(multi, s, n, sigma))
    for l in range(1, min(s - 1, args.max_odd_pairs) + 1):
        put("cycle-refined-sum", l, math.log(cycle_refined_insertion_sum(s, l, bound_k)))
    for q in range(1, args.max_merges + 1):
        if s - (q + 1) - q < 0:
            break
        mp = mixed_parity_reduction_bound(s, n, odd_pairs=q + 1, walk_count=q + 1, merge_count=q)
        put("mixed-trivial-ratio", q, safe_log(mp.trivial_ratio))
        put("mixed-refined-ratio", q, safe_log(mp.refined_ratio))
    put(
        "typed-vertex-log",
        args.growth_exponent,
        typed_vertex_contribution_log(
            s,
            n,
            odd_pairs=1,
            growth_exponent=args.growth_exponent,
            nonclosed_count=args.nonclosed,
            small_type_count=args.small_type,
            large_type_weight=args.large_type,
            sigma=sigma,
        ),
    )
    put(
        "distance-two-log",
        args.complexity,
        distance_two_tail_log(s, args.complexity, args.nearby),
    )
    conv_s = min(s, 2000)
    if conv_s >= 2:
        put("catalan-convolution-ratio", conv_s, math.log(catalan_convolution_ratio(conv_s)))
        put("power-sum-ratio", s, math.log(power_sum_ratio(max(s, 2))))
    verified = verify_catalan_convolution(min(max(s, 2), 10**4))
    rows.append(["catalan-convolution-verified", min(max(s, 2), 10**4), 0.0 if verified else -math.inf, 1.0 if verified else 0.0])
    header = ["family", "parameter", "log_value", "value"]
    return header, rows, 0


def _cmd_dyck_stats(args):
    header = ["s", "functional", "mode", "order", "trials", "seed", "parameter", "value"]
    rows = []
    if args.functional == "windows":
        v = expected_k_functional(args.s, 1, mode=args.mode, trials=args.trials, seed=args.seed)
        rows.append([args.s, "windows", args.mode, 1, args.trials, args.seed, "", v])
    elif args.functional == "tensor":
        v = expected_k_functional(
            args.s, args.tensor_order, mode=args.mode, trials=args.trials, seed=args.seed
        )
        rows.append([args.s, "tensor", args.mode, args.tensor_order, args.trials, args.seed, "", v])
    elif args.functional == "stay":
        v = stay_above_full_window_expectation(
            args.s, mode=args.mode, trials=args.trials, seed=args.seed
        )
        rows.append([args.s, "stay", args.mode, 1, args.trials, args.seed, "", v])
    elif args.functional == "beta":
        rows.append([args.s, "beta", "exact", args.tensor_order, 0, args.seed, "", beta_sum(args.tensor_order)])
    elif args.functional == "maxlevel":
        table = max_level_tail(args.s, args.trials, args.seed)
        for k, p in table.rows:
            rows.append([args.s, "maxlevel", "mc", 1, args.trials, args.seed, k, p])
        if table.fit_c1 is not None:
            rows.append([args.s, "maxlevel", "mc", 1, args.trials, args.seed, "fit_c1", table.fit_c1])
            rows.append([args.s, "maxlevel", "mc", 1, args.trials, args.seed, "fit_c2", table.fit_c2])
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown functional {args.functional!r}")
    return header, rows, 0


# ---------- argument wiring ----------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output base name (default: the subcommand name)")
    p.add_argument("--output-dir", help="output directory (default: $TML_OUTPUT_DIR or .)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> _Parser:
    parser = _Parser(prog="tml", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("trace-mc", parents=[], help="Monte Carlo estimate of E[Tr A^(2s)]")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=["eig", "power"], default="eig")
    p.add_argument("--raw", action="store_true", help="trace of the unnormalized matrix")
    p.add_argument("--threads", type=int, default=_default_threads())
    _add_common(p)
    p.set_defaults(func=_cmd_trace_mc)

    p = sub.add_parser("trace-exact", help="exact E[Tr A^(2s)] by enumeration")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--route", choices=["auto", "full", "patterns"], default="auto")
    _add_common(p)
    p.set_defaults(func=_cmd_trace_exact)

    p = sub.add_parser("spectrum", help="top eigenvalue and spectral norm per sample")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("edge-exceed", help="how often lambda_max clears 2 sigma + n^(-6/11+eps)")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    _add_common(p)
    p.set_defaults(func=_cmd_edge_exceed)

    p = sub.add_parser("concentration", help="tail of lambda_max about its mean vs the proved ceiling")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--t-values", default="1,2,3,4,5,6,7,8")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    _add_common(p)
    p.set_defaults(func=_cmd_concentration)

    p = sub.add_parser("verify-gluing", help="run every surgery invariant over walk families")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--skip-exhaustive", action="store_true")
    p.add_argument("--random", type=int, default=0, help="extra uniformly random walks")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_verify_gluing)

    p = sub.add_parser("bounds-table", help="counting-bound sweeps in log space")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--entry-bound", type=float, default=1.0)
    p.add_argument("--prefactor", type=float, default=1.0)
    p.add_argument("--max-odd-pairs", type=int, default=8)
    p.add_argument("--max-merges", type=int, default=3)
    p.add_argument("--growth-exponent", type=float, default=0.01)
    p.add_argument("--nonclosed", type=int, default=2)
    p.add_argument("--small-type", type=int, default=1)
    p.add_argument("--large-type", type=float, default=0.0)
    p.add_argument("--complexity", type=int, default=2)
    p.add_argument("--nearby", type=float, default=10.0)
    _add_common(p)
    p.set_defaults(func=_cmd_bounds_table)

    p = sub.add_parser("dyck-stats", help="window functionals of uniform nonnegative bridges")
    p.add_argument("--s", type=int, required=True)
    p.add_argument(
        "--functional",
        choices=["windows", "stay", "tensor", "beta", "maxlevel"],
        default="windows",
    )
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--tensor-order", type=int, default=2)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_dyck_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = _now()
    try:
        header, rows, code = args.func(args)
    except (DistributionError, ValueError) as exc:
        print(f"tml {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    outputs = _write_table(args, header, rows)
    finished = _now()
    _write_manifest(args, outputs, started, finished)
    return code


if __name__ == "__main__":
    sys.exit(main())
