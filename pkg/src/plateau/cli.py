"""Command-line entry point: ``plateau <subcommand> [options]``.

Every subcommand except ``run`` builds a one-check scenario from its flags,
so the single-check and batch paths share validation and reporting.

Exit status: 0 when every check passes, 1 when any check fails, 2 for usage
or scenario errors.
"""
import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import ScenarioError
from .scenario import SCHEMAS, Scenario, emit_report, make_check, parse_scenario, run_scenario

BUNDLED = ("paper-hopf", "paper-morse", "paper-volumes")


def bundled_scenario_text(name):
    name = name[:-5] if name.endswith(".json") else name
    return resources.files("plateau").joinpath("scenarios", f"{name}.json").read_text()


def _load(ref):
    p = Path(ref)
    if p.is_file():
        return p.read_text(), str(p)
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in BUNDLED and p.parent == Path("."):
        return bundled_scenario_text(stem), f"bundled:{stem}"
    raise ScenarioError(ref, f"no such file (bundled scenarios: {', '.join(BUNDLED)})")


def _json_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"not valid JSON: {e.msg}") from None


def _bool_arg(text):
    t = text.lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="base seed (default 0, or the scenario's seed)")
    g.add_argument("--tol", type=float, default=None, help="override the primary tolerance of each check")
    g.add_argument("--format", choices=("json", "text"), default="text", help="report format (default text)")
    g.add_argument("--samples", type=int, default=None, help="sample count for sampled checks")
    g.add_argument("--jobs", type=int, default=1, help="worker threads for independent checks")
    g.add_argument("--timings", action="store_true", help="include wall time per check (breaks byte-identity)")
    g.add_argument("-o", "--output", default=None, help="write the report to this file instead of stdout")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="plateau", description="Numerical checks for pluriclosed metrics, "
                                     "Morse normal forms, sphere periods and disc-family volumes.")
    parser.add_argument("--version", action="version", version=f"plateau {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("run", parents=[common], help="run a scenario file or a bundled scenario")
    p.add_argument("scenario", help=f"path to a JSON scenario or one of: {', '.join(BUNDLED)}")

    p = sub.add_parser("normal-form", parents=[common], help="normal form of a psh Morse critical point")
    p.add_argument("--levi", type=_json_arg, required=True, help="Levi matrix as JSON rows; complex as [re, im]")
    p.add_argument("--holomorphic", type=_json_arg, required=True, help="symmetric Q, germ rho = 2 Re(z^T Q z) + z^H H z")
    p.add_argument("--delta1", type=float, default=None, help="report the Case 2 contraction delta0")

    p = sub.add_parser("sweep", parents=[common], help="Case 2 quadric sweep certificate")
    p.add_argument("--delta0", type=float, required=True)
    p.add_argument("--t-steps", type=int, default=100)
    p.add_argument("--n", type=int, default=2)

    p = sub.add_parser("metric-check", parents=[common], help="pluriclosed / plurinegative / Hopf descent test")
    p.add_argument("--form", required=True)
    p.add_argument("--test", default="pluriclosed", choices=("pluriclosed", "plurinegative", "hopf-descent"))
    p.add_argument("--expect", type=_bool_arg, default=True)
    p.add_argument("--inner", type=float, default=1.0)
    p.add_argument("--outer", type=float, default=2.0)

    for name, text in (("period", "period of d^c w over a 3-sphere"),
                       ("obstruction", "spherical-shell obstruction verdict")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--form", required=True)
        p.add_argument("--radius", type=float, default=1.0)
        p.add_argument("--center", type=_json_arg, default=[0.0, 0.0])
        p.add_argument("--orientation", choices=("outward", "inward"), default="outward")
        p.add_argument("--grid", type=int, nargs=3, default=[64, 64, 64])
        p.add_argument("--refined-grid", type=int, nargs=3, default=[96, 96, 96])
        if name == "period":
            p.add_argument("--expect-abs", type=float, default=None)
        else:
            p.add_argument("--expect", choices=("shell_obstruction", "no_obstruction"), required=True)
            p.add_argument("--min-cycle-period", type=float, default=None)

    for name, text in (("volume-scan", "graph volumes over a disc family"),
                       ("gap-check", "pairwise volume gaps near a parameter")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--family", required=True)
        p.add_argument("--s", type=_json_arg, required=True, help="JSON list of parameters")
        p.add_argument("--form", default=None)
        if name == "volume-scan":
            p.add_argument("--C0", type=float, required=True)
            p.add_argument("--expect-slope", type=float, default=None)
        else:
            p.add_argument("--nu", type=float, required=True)
            p.add_argument("--s0", type=_json_arg, required=True)
            p.add_argument("--radius", type=float, required=True)
            p.add_argument("--expect", type=_bool_arg, required=True)
    return parser


def _drop_none(d):
    return {k: v for k, v in d.items() if v is not None}


def _single_check(args):
    seed = args.seed or 0
    k = args.command
    if k == "normal-form":
        params = {"levi": args.levi, "holomorphic": args.holomorphic, "delta1": args.delta1}
    elif k == "sweep":
        params = {"delta0": args.delta0, "t_steps": args.t_steps, "n": args.n,
                  "samples_per_slice": args.samples}
    elif k == "metric-check":
        params = {"form": args.form, "test": args.test, "expect": args.expect, "inner": args.inner,
                  "outer": args.outer, "samples": args.samples}
    elif k in ("period", "obstruction"):
        params = {"form": args.form, "radius": args.radius, "center": args.center,
                  "orientation": args.orientation, "grid": args.grid, "refined_grid": args.refined_grid}
        if k == "period":
            params["expect_abs"] = args.expect_abs
        else:
            params.update(expect=args.expect, min_cycle_period=args.min_cycle_period)
    elif k == "volume-scan":
        params = {"family": args.family, "s": args.s, "form": args.form, "C0": args.C0,
                  "expect_slope": args.expect_slope}
    else:
        params = {"family": args.family, "s": args.s, "form": args.form, "nu": args.nu, "s0": args.s0,
                  "radius": args.radius, "expect": args.expect}
    primary = SCHEMAS[k][2]
    tols = {primary: args.tol} if (primary and args.tol is not None) else None
    check = make_check(k, _drop_none(params), tols, seed)
    return Scenario([check], seed=seed, name=k)


def _apply_overrides(s, args):
    if args.seed is not None:
        s.seed = args.seed
        for c in s.checks:
            c.seed = args.seed
    if args.tol is not None:
        for c in s.checks:
            primary = SCHEMAS[c.kind][2]
            if primary:
                c.tolerances[primary] = args.tol
    if args.samples is not None:
        for c in s.checks:
            for key in ("samples", "samples_per_slice"):
                if key in c.params:
                    c.params[key] = args.samples
    return s


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.jobs < 1 or (args.samples is not None and args.samples < 1):
        print("plateau: error: --jobs and --samples must be positive", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            text, _ = _load(args.scenario)
            s = _apply_overrides(parse_scenario(text), args)
        else:
            s = _single_check(args)
    except ScenarioError as e:
        print(f"plateau: error: {e}", file=sys.stderr)
        return 2

    report = run_scenario(s, jobs=args.jobs, timings=args.timings)
    data = emit_report(report, args.format)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
