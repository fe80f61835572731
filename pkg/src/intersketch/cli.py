"""Command-line surface: sketch, merge, estimate, theory, simulate.

Exit codes: 0 success, 2 validation problem, 3 incompatible sketches,
4 I/O failure.  Every subcommand is deterministic for fixed flags and
inputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from typing import Optional

from .cardest import hll_estimate, maxsketch_cardinality
from .hashkit import HashFamily
from .intersect import InfeasibleParamsError, MlConfig, ProblemParams, ml_estimate
from .simlab import (
    InfeasibleInstanceError,
    SweepConfig,
    paper_scale_config,
    run_sweep,
    write_csv,
)
from .sketchkit import (
    EmptySketchError,
    HllSketch,
    IncompatibleSketchError,
    MaxSketch,
    indicator_stats,
    load_sketch,
    save_sketch,
)
from .theory import SingularParamsError, theory_report

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INCOMPATIBLE = 3
EXIT_IO = 4


def _read_tokens(path: Optional[str]) -> list[bytes]:
    """Read newline-delimited UTF-8 tokens; whole lines are identities."""
    if path is None or path == "-":
        data = sys.stdin.buffer.read()
    else:
        with open(path, "rb") as fh:
            data = fh.read()
    return [line for line in data.split(b"\n") if line]


def _estimate_value(sketch) -> float:
    if sketch.is_empty:
        return 0.0
    if isinstance(sketch, MaxSketch):
        return maxsketch_cardinality(sketch).value
    return hll_estimate(sketch).value


def cmd_sketch(args: argparse.Namespace) -> int:
    tokens = _read_tokens(args.input)
    family = HashFamily(base_seed=args.seed, m=args.m)
    sketch = MaxSketch(family) if args.kind == "max" else HllSketch(family)
    sketch.update_many(tokens)
    save_sketch(sketch, args.out)
    print(format(_estimate_value(sketch), ".9g"))
    return EXIT_OK


def cmd_merge(args: argparse.Namespace) -> int:
    sa = load_sketch(args.a)
    sb = load_sketch(args.b)
    try:
        merged = sa.merge(sb)
    except IncompatibleSketchError as err:
        raise IncompatibleSketchError(f"{args.a} and {args.b}: {err}") from err
    save_sketch(merged, args.out)
    print(format(_estimate_value(merged), ".9g"))
    return EXIT_OK


def _load_pair(path_a: str, path_b: str):
    sa = load_sketch(path_a)
    sb = load_sketch(path_b)
    if type(sa) is not type(sb) or sa.family != sb.family:
        raise IncompatibleSketchError(
            f"{path_a} and {path_b} are not mergeable: kinds/seeds/m must match"
        )
    return sa, sb


def cmd_estimate(args: argparse.Namespace) -> int:
    sa, sb = _load_pair(args.a, args.b)
    schemes = ("s1", "s2", "s3", "ml") if args.scheme == "all" else (args.scheme,)

    hll_pair = None
    if args.hll_a or args.hll_b:
        if not (args.hll_a and args.hll_b):
            raise ValueError("--hll-a and --hll-b must be given together")
        ha, hb = _load_pair(args.hll_a, args.hll_b)
        if not isinstance(ha, HllSketch):
            raise ValueError("--hll-a/--hll-b must point at hll-v1 sketch files")
        hll_pair = (ha, hb)

    out: dict = {"scheme": args.scheme, "rho_hat": None, "a_hat": None,
                 "b_hat": None, "u_hat": None, "estimates": {}, "ml": None}

    if isinstance(sa, HllSketch):
        if set(schemes) - {"s1"}:
            raise ValueError(
                "hll sketch files support only --scheme s1; the Jaccard and "
                "ML paths need max-sketches"
            )
        a_hat = _estimate_value(sa)
        b_hat = _estimate_value(sb)
        u_hat = _estimate_value(sa.merge(sb))
        out.update(a_hat=a_hat, b_hat=b_hat, u_hat=u_hat)
        out["estimates"]["s1"] = a_hat + b_hat - u_hat
    else:
        stats = indicator_stats(sa, sb)
        rho = stats.k1 / stats.m
        if hll_pair is not None:
            a_hat = _estimate_value(hll_pair[0])
            b_hat = _estimate_value(hll_pair[1])
            u_hat = _estimate_value(hll_pair[0].merge(hll_pair[1]))
        else:
            a_hat = maxsketch_cardinality(sa).value
            b_hat = maxsketch_cardinality(sb).value
            u_hat = maxsketch_cardinality(sa.merge(sb)).value
        out.update(rho_hat=rho, a_hat=a_hat, b_hat=b_hat, u_hat=u_hat)
        if "s1" in schemes:
            out["estimates"]["s1"] = a_hat + b_hat - u_hat
        if "s2" in schemes:
            out["estimates"]["s2"] = rho * u_hat
        if "s3" in schemes:
            out["estimates"]["s3"] = rho / (rho + 1.0) * (a_hat + b_hat) if rho else 0.0
        if "ml" in schemes:
            report = ml_estimate(
                sa, sb, MlConfig(initializer=args.init),
                hll_a=hll_pair[0] if hll_pair else None,
                hll_b=hll_pair[1] if hll_pair else None,
            )
            out["estimates"]["ml"] = report.n_hat
            out["ml"] = {
                "n_hat": report.n_hat,
                "a_hat": report.a_hat,
                "b_hat": report.b_hat,
                "iterations": report.iterations,
                "converged": report.converged,
                "fallback": report.fallback,
                "log_likelihood": report.log_likelihood,
                "initial": list(report.initial),
            }

    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        for key in ("rho_hat", "a_hat", "b_hat", "u_hat"):
            if out[key] is not None:
                print(f"{key:<12} {out[key]:.9g}")
        for scheme, value in out["estimates"].items():
            print(f"n_hat[{scheme}]{'':<3} {value:.9g}")
        if out["ml"] is not None:
            ml = out["ml"]
            print(f"ml.iterations {ml['iterations']}")
            print(f"ml.converged  {str(ml['converged']).lower()}")
            print(f"ml.fallback   {ml['fallback'] or 'none'}")
    return EXIT_OK


_THEORY_CSV_HEADER = (
    "a,b,n,u,m,rho,cr_var_norm,var_s1_norm,var_s2_norm,var_s3_norm,"
    "cr_var_n,cov_ab,cov_au,cov_bu,cov_an,z_value"
)


def cmd_theory(args: argparse.Namespace) -> int:
    if args.n <= 0:
        raise InfeasibleParamsError("need n > 0: every normalized prediction divides by n")
    params = ProblemParams(a=args.a, b=args.b, n=args.n)
    report = theory_report(params, args.m)
    values = [
        ("a", params.a), ("b", params.b), ("n", params.n), ("u", params.u),
        ("m", args.m), ("rho", params.rho),
        ("cr_var_norm", report.cr_var_norm),
        ("var_s1_norm", report.var_scheme1_norm),
        ("var_s2_norm", report.var_scheme2_norm),
        ("var_s3_norm", report.var_scheme3_norm),
        ("cr_var_n", report.cr_var_n),
        ("cov_ab", report.cov_ab), ("cov_au", report.cov_au),
        ("cov_bu", report.cov_bu), ("cov_an", report.cov_an),
        ("z_value", report.z_value),
    ]
    if args.csv:
        print(_THEORY_CSV_HEADER)
        print(",".join(format(float(v), ".9g") for _, v in values))
    else:
        for key, v in values:
            print(f"{key:<13} {float(v):.9g}")
        if report.fisher is None:
            print("fisher        singular at alpha = 0 or beta = 0 (identical-set boundary)")
        else:
            f = report.fisher
            print("fisher        " + "  ".join(format(x, ".9g") for x in f[0]))
            for row in f[1:]:
                print("              " + "  ".join(format(x, ".9g") for x in row))
    return EXIT_OK


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.paper_scale:
        config = paper_scale_config(seed=args.seed)
        if args.trials is not None:
            config = dataclasses.replace(config, trials=args.trials)
        points = len(config.f_values) * len(config.alpha_values) * len(config.m_values)
        work = config.trials * sum(
            (config.a * (1 + f - al)) * m
            for f in config.f_values
            for al in config.alpha_values
            for m in config.m_values
        )
        print(
            f"[simlab] full-scale run: {points} grid points x {config.trials} trials, "
            f"~{work:.2e} hash evaluations; expect this to take hours",
            file=sys.stderr,
        )
    else:
        config = SweepConfig(
            a=args.a,
            f_values=args.f,
            alpha_values=args.alpha,
            m_values=args.m,
            trials=args.trials if args.trials is not None else 2000,
            seed=args.seed,
            schemes=tuple(args.schemes.split(",")),
            init=args.init,
            cardinalities=args.cardinalities,
        )
    results = run_sweep(config, progress=args.progress)
    write_csv(results, args.out)
    print(f"wrote {len(results)} rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intersketch",
        description="Sketch two element streams and estimate the size of their intersection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sketch", help="build a sketch from newline-delimited tokens")
    p.add_argument("--input", default=None, help="token file (default: stdin)")
    p.add_argument("--kind", choices=("max", "hll"), default="max")
    p.add_argument("--m", type=int, default=1024, help="hash functions / registers")
    p.add_argument("--seed", type=int, default=1, help="64-bit hash seed")
    p.add_argument("--out", required=True, help="output sketch JSON path")
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("merge", help="merge two compatible sketch files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("estimate", help="estimate |A intersect B| from two sketch files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--scheme", choices=("s1", "s2", "s3", "ml", "all"), default="all")
    p.add_argument("--init", choices=("maxsketch", "hll"), default="maxsketch",
                   help="cardinality initializer for the ML solve")
    p.add_argument("--hll-a", default=None, help="companion HLL sketch of stream A")
    p.add_argument("--hll-b", default=None, help="companion HLL sketch of stream B")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("theory", help="closed-form variance predictions at (a, b, n, m)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--csv", action="store_true", help="emit one CSV row instead of text")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="Monte-Carlo sweep over an (f, alpha, m) grid")
    p.add_argument("--a", type=int, default=10_000)
    p.add_argument("--f", type=_float_list, default=(1.0, 5.0, 10.0))
    p.add_argument("--alpha", type=_float_list,
                   default=tuple(round(0.05 * i, 2) for i in range(1, 20)))
    p.add_argument("--m", type=_int_list, default=(256, 1024))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--schemes", default="ml,s1,s2,s3")
    p.add_argument("--init", choices=("maxsketch", "hll"), default="maxsketch")
    p.add_argument("--cardinalities", choices=("hll", "maxsketch"), default="hll")
    p.add_argument("--paper-scale", action="store_true",
                   help="a=1e6, 10k trials, alpha step 0.01, published register counts")
    p.add_argument("--progress", action="store_true", help="progress lines on stderr")
    p.add_argument("--out", required=True, help="results CSV path")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    # benign on this numba/TBB pairing and pure noise for CLI users
    warnings.filterwarnings(
        "ignore", message="The TBB threading layer requires TBB version"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IncompatibleSketchError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except (
        ValueError,
        IndexError,
        InfeasibleParamsError,
        SingularParamsError,
        InfeasibleInstanceError,
        EmptySketchError,
    ) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
