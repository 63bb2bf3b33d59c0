"""Command-line interface.

Subcommands::

    powertail fit      --input FILE --year Y           fit (T, theta) to one year
    powertail plotdata --input FILE --year Y           survival curves for plotting
    powertail compare  --input FILE --year Y --year Z  pairwise KS distances
    powertail sample   --n N --seed S                  draw synthetic impact factors

Exit codes: 0 success, 1 input or configuration error, 2 completed with
warnings (a fit that did not converge).
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .distcore import ModelParams, REFERENCE_PARAMS, quad_profile, survival_normalized, survival_small_r
from .errors import PowertailError
from .fitkit import FitConfig, empirical_survival, fit, stability_report
from .ingest import ParseOptions, apply_exclusions, column_values, read_table
from .sampler import GridSpec, sample, tabulate

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_WARN = 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def fmt(x):
    """17 significant digits, ``.`` decimal."""
    return format(float(x), ".17g")


def _common(parser, data=True):
    if data:
        parser.add_argument("--input", required=True, metavar="PATH", help="impact-factor table")
        parser.add_argument("--year", type=int, action="append", default=[], metavar="Y")
        parser.add_argument("--exclude", action="append", default=[], metavar="NAME",
                            help="journal name to drop (case-insensitive, repeatable)")
        parser.add_argument("--delimiter", default="auto",
                            choices=["auto", "semicolon", "tab", "comma"])
    parser.add_argument("--t", type=float, dest="T", metavar="T")
    parser.add_argument("--beta", type=float)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--grid-points", type=int)
    parser.add_argument("--r-min", type=float)
    parser.add_argument("--r-max", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--out", metavar="PATH")
    parser.add_argument("--format", choices=["table", "report"])


def build_parser():
    parser = _Parser(prog="powertail", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"powertail {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit the survival function to one year")
    _common(p)
    p.add_argument("--max-iter", type=int, default=600)
    p.add_argument("--min-tail-count", type=int, default=5)
    p.add_argument("--fit-beta", action="store_true", help="also fit beta (experimental)")

    p = sub.add_parser("plotdata", help="empirical, model and exponential survival columns")
    _common(p)
    p.add_argument("--max-iter", type=int, default=600)
    p.add_argument("--min-tail-count", type=int, default=5)

    p = sub.add_parser("compare", help="KS distance between years")
    _common(p)

    p = sub.add_parser("sample", help="draw values from the model")
    _common(p, data=False)
    return parser


def _load(args):
    if not os.path.isfile(args.input):
        raise CliError(f"input file not found: {args.input}")
    records, report = read_table(args.input, ParseOptions(delimiter=args.delimiter))
    records, delta = apply_exclusions(records, args.exclude)
    for msg in report.warnings + delta.warnings:
        print(f"powertail: warning: {msg}", file=sys.stderr)
    for line, reason in report.malformed:
        print(f"powertail: warning: line {line} skipped: {reason}", file=sys.stderr)
    return records, len(delta.excluded)


def _single_year(args, records):
    if len(args.year) != 1:
        raise CliError("exactly one --year is required")
    return column_values(records, args.year[0])


def _fit_config(args, quad):
    r_range = None
    if args.r_min is not None or args.r_max is not None:
        if args.r_min is None or args.r_max is None:
            raise CliError("--r-min and --r-max must be given together")
        r_range = (args.r_min, args.r_max)
    kwargs = dict(
        r_range=r_range,
        min_tail_count=args.min_tail_count,
        max_iter=args.max_iter,
        quad=quad,
    )
    if args.grid_points is not None:
        kwargs["grid_points"] = args.grid_points
    if args.beta is not None:
        kwargs["beta_fixed"] = args.beta
    if getattr(args, "fit_beta", False):
        kwargs["fit_beta"] = True
    return FitConfig(**kwargs)


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_fit(args, quad):
    records, excluded = _load(args)
    values = _single_year(args, records)
    result = fit(values, _fit_config(args, quad))
    report = {
        "T": result.params.T,
        "beta": result.params.beta,
        "theta": result.params.theta,
        "objective": result.objective,
        "grid_points": int(result.grid.size),
        "converged": result.converged,
        "n": result.n,
        "excluded_count": excluded,
        "year": args.year[0],
        "iterations": result.iterations,
    }
    if (args.format or "report") == "report":
        _emit(args, _json(report))
    else:
        lines = []
        for key, value in report.items():
            if isinstance(value, float):
                value = fmt(value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key};{value}\n")
        _emit(args, "field;value\n" + "".join(lines))
    if not result.converged:
        print(f"powertail: warning: fit did not converge ({result.message})", file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


def _params_from_flags(args, default=None):
    if args.T is None and args.theta is None and default is not None:
        return default
    if args.T is None or args.theta is None:
        raise CliError("--t and --theta must be given together")
    beta = 2.0 if args.beta is None else args.beta
    return ModelParams(T=args.T, beta=beta, theta=args.theta)


def cmd_plotdata(args, quad):
    records, _ = _load(args)
    values = _single_year(args, records)
    emp = empirical_survival(values)
    status = EXIT_OK
    if args.T is None and args.theta is None:
        result = fit(values, _fit_config(args, quad))
        params = result.params
        if not result.converged:
            print("powertail: warning: fit did not converge", file=sys.stderr)
            status = EXIT_WARN
    else:
        params = _params_from_flags(args)
    positive = emp.values[emp.values > 0.0]
    if positive.size == 0:
        raise CliError("no positive impact factors to plot")
    r_min = args.r_min if args.r_min is not None else float(positive[0])
    r_max = args.r_max if args.r_max is not None else float(positive[-1])
    if not 0.0 < r_min < r_max:
        raise CliError("need 0 < r-min < r-max")
    points = args.grid_points if args.grid_points is not None else 60
    r = np.geomspace(r_min, r_max, points)
    r[[0, -1]] = r_min, r_max
    columns = {
        "R": r,
        "survival_empirical": emp(r),
        "survival_model": survival_normalized(params, r, quad),
        "survival_exponential": survival_small_r(params.T, r),
    }
    if (args.format or "table") == "table":
        lines = [";".join(columns) + "\n"]
        for i in range(points):
            lines.append(";".join(fmt(col[i]) for col in columns.values()) + "\n")
        _emit(args, "".join(lines))
    else:
        _emit(args, _json({
            "params": {"T": params.T, "beta": params.beta, "theta": params.theta},
            "n": emp.n,
            "columns": {k: [float(v) for v in col] for k, col in columns.items()},
        }))
    return status


def cmd_compare(args, quad):
    records, _ = _load(args)
    if len(args.year) < 2:
        raise CliError("compare needs at least two --year values")
    samples = [(str(year), column_values(records, year)) for year in args.year]
    report = stability_report(samples)
    if (args.format or "table") == "table":
        lines = ["year_a;year_b;ks;n_a;n_b\n"]
        for a, b, ks, na, nb in report.rows():
            lines.append(f"{a};{b};{fmt(ks)};{na};{nb}\n")
        _emit(args, "".join(lines))
    else:
        _emit(args, _json({
            "pairs": [
                {"year_a": a, "year_b": b, "ks": ks, "n_a": na, "n_b": nb}
                for a, b, ks, na, nb in report.rows()
            ]
        }))
    return EXIT_OK


def cmd_sample(args, quad):
    if args.seed is None:
        raise CliError("--seed is required: sampling must be reproducible")
    if args.n is None or args.n <= 0:
        raise CliError("--n must be a positive integer")
    params = _params_from_flags(args, default=REFERENCE_PARAMS)
    grid = GridSpec(
        r_min=args.r_min if args.r_min is not None else GridSpec.r_min,
        r_max=args.r_max if args.r_max is not None else GridSpec.r_max,
        points=args.grid_points if args.grid_points is not None else GridSpec.points,
    )
    table = tabulate(params, quad, grid)
    values = sample(table, args.n, args.seed)
    _emit(args, "".join(fmt(v) + "\n" for v in values))
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "plotdata": cmd_plotdata,
    "compare": cmd_compare,
    "sample": cmd_sample,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        quad = quad_profile()
        return COMMANDS[args.command](args, quad)
    except (CliError, PowertailError, OSError) as exc:
        # OSError covers unreadable inputs and unwritable --out paths
        print(f"powertail: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
