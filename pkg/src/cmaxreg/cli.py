"""Command line entry point.

Every subcommand except ``run`` assembles a one-task scenario from its flags,
so the CLI and scenario files share one code path.
"""

from __future__ import annotations

import argparse
import sys

from . import scenario as sc

EXIT_OK = 0
EXIT_TASK_ERROR = 3
EXIT_USAGE = 2

DEFAULTS = {"tol": 1e-8, "budget": 1024, "seed": 0}


def _number_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_model_flags(p: argparse.ArgumentParser, generator: str = "linear") -> None:
    g = p.add_argument_group("model")
    g.add_argument("--generator", choices=["linear", "rotation", "list", "constant"], default=generator)
    g.add_argument("--slope", type=float, default=-1.0, help="linear symbol m_n = slope*n + offset")
    g.add_argument("--offset", type=float, default=0.0)
    g.add_argument("--theta", type=float, default=1.0, help="rotation symbol m_n = shift + i*theta*n")
    g.add_argument("--shift", type=float, default=0.0)
    g.add_argument("--symbol", type=_number_list, help="comma separated explicit real symbol")
    g.add_argument("--constant", type=float, default=-1.0)
    g.add_argument("--space", choices=["sup", "prefixes", "beta0"], default="sup")
    g.add_argument("--envelope", choices=["linf", "c0"], default="linf")
    g.add_argument("--control", choices=["identity", "extension"], default="identity")
    g.add_argument("--horizon", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset by the subparser
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--dim", type=int, help="truncation N (default 32, or len(--symbol))")
    common.add_argument("--tol", type=float, help=f"quadrature tolerance (default {DEFAULTS['tol']})")
    common.add_argument("--budget", type=int, help=f"max cells of an SV ladder (default {DEFAULTS['budget']})")
    common.add_argument("--seed", type=int, help="seed of the random probes and samplers (default 0)")
    common.add_argument("--out", help="directory for report.json and CSV files")

    parser = argparse.ArgumentParser(prog="cmaxreg", parents=[common],
                                     description="C-maximal regularity lab on truncated sequence spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="mild solution, residuals and A(T*f) series")
    _add_model_flags(p)
    p.add_argument("--forcing", choices=["zero", "constant", "ramp", "sin"], default="zero")
    p.add_argument("--k", type=int, default=1, help="frequency of the sin forcing")
    p.add_argument("--x0-unit", type=int, default=1, help="x0 = e_k")
    p.add_argument("--mode", choices=["strict", "classical"], default="strict")
    p.add_argument("--h", type=float, default=1e-3, help="difference step")

    p = sub.add_parser("sv", parents=[common], help="semivariation of t -> T(t)B")
    _add_model_flags(p)
    p.add_argument("--method", choices=["auto", "sign_enum", "phase_grid", "random_ball"], default="auto")

    p = sub.add_parser("maxreg", parents=[common], help="C-maximal regularity verdict")
    _add_model_flags(p)

    p = sub.add_parser("admissible", parents=[common], help="C-admissibility verdict for A_{-1}")
    _add_model_flags(p)
    p.set_defaults(control="extension")

    p = sub.add_parser("travis", parents=[common], help="semivariation sums recovered from A Psi_r^B")
    _add_model_flags(p)
    p.add_argument("--cells", type=int, default=4)
    p.add_argument("--eps", type=_number_list, default=[1e-1, 1e-2, 1e-3])

    p = sub.add_parser("demo-baillon", parents=[common], help="semivariation growth of rotations")
    _add_model_flags(p, generator="rotation")
    p.add_argument("--dims", type=lambda s: [int(v) for v in _number_list(s)], default=[8, 16, 32])

    p = sub.add_parser("run", parents=[common], help="run a JSON scenario")
    p.add_argument("scenario")
    return parser


def apply_global_flags(data: dict, args: argparse.Namespace) -> dict:
    """Overlay explicitly given global flags onto a scenario."""
    given = vars(args)
    if "dim" in given:
        data["space"]["dim"] = args.dim
    if "tol" in given:
        data.setdefault("tolerances", {})["quadrature"] = args.tol
    if "budget" in given:
        data.setdefault("budget", {})["sv_cells"] = args.budget
    if "seed" in given:
        data["seed"] = args.seed
    sc.validate(data)
    return data


def scenario_from_args(args: argparse.Namespace) -> dict:
    if args.generator == "list" and not args.symbol:
        raise sc.ScenarioError("--generator list needs --symbol")
    dim = getattr(args, "dim", None) or (len(args.symbol) if args.symbol else 32)
    params = {
        "linear": {"slope": args.slope, "offset": args.offset},
        "rotation": {"theta": args.theta, "shift": args.shift},
        "list": {"values": args.symbol},
        "constant": {"c": args.constant},
    }[args.generator]
    task = {"demo-baillon": "baillon_demo", "admissible": "admissible"}.get(args.command, args.command)
    data = {
        "schema_version": sc.SCHEMA_VERSION,
        "name": f"cli-{args.command}",
        "seed": DEFAULTS["seed"],
        "space": {"dim": dim, "seminorms": {"kind": args.space}, "envelope": args.envelope},
        "generator": {"kind": args.generator, "params": params},
        "control": {"kind": args.control},
        "horizon": args.horizon,
        "tolerances": {"quadrature": DEFAULTS["tol"]},
        "budget": {"sv_cells": DEFAULTS["budget"]},
        "tasks": [task],
    }
    opts = {}
    if task == "solve":
        f = {"kind": args.forcing}
        if args.forcing == "sin":
            f["k"] = args.k
        data["forcing"] = {"f": f, "x0": {"unit": args.x0_unit}}
        opts = {"mode": args.mode, "h": args.h}
    elif task == "sv":
        opts = {"method": args.method}
    elif task == "travis":
        opts = {"cells": args.cells, "eps_ladder": args.eps}
    elif task == "baillon_demo":
        opts = {"dims": args.dims}
    if opts:
        data["task_options"] = {task: opts}
    return apply_global_flags(data, args)


def _summary(task: str, res: dict) -> str:
    if "error" in res:
        return f"{task}: ERROR {res['error']}"
    if "holds" in res:
        why = "; ".join(res["reasons"]) or "all checks passed"
        return f"{task}: {res['holds']} ({why})"
    if task == "sv":
        return "sv: " + ", ".join(f"{k}={e['value']:.10g} [{e['kind']}, converged={e['converged']}]"
                                  for k, e in res["estimates"].items())
    if task == "travis":
        return f"travis: sv_sum={res['sv_sum']:.10g} C={res['operator_bound_C']:.10g} gap={res['gap']:.3g}"
    if task == "baillon_demo":
        rows = ", ".join(f"N={r['dim']}: {r['value']:.6g}" for r in res["rows"])
        return f"baillon_demo: {rows} (slope in N {res['dim_slope']:.3f})"
    if task == "solve":
        return f"solve: integrated residual {res['integrated_residual']}"
    return f"{task}: done"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            data = apply_global_flags(sc.load_scenario(args.scenario), args)
        else:
            data = scenario_from_args(args)
        report = sc.run_data(data)
    except (OSError, sc.ScenarioError) as exc:
        print(f"cmaxreg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for task, res in report.results.items():
        print(_summary(task, res))
    out = getattr(args, "out", None)
    if out:
        try:
            for path in sc.emit_report(report, out):
                print(f"wrote {path}")
        except OSError as exc:
            print(f"cmaxreg: {exc}", file=sys.stderr)
            return EXIT_TASK_ERROR
    return EXIT_TASK_ERROR if report.failed_tasks else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
