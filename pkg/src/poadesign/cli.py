"""Command-line interface: one binary exposing the mechanism constructions,
the price-of-anarchy program, game analysis, best-response dynamics, and the
two experiment pipelines.

Exit codes: 0 on success, 1 on domain errors (a machine-readable JSON object
is written to stderr), 2 on usage errors (argparse). All stdout output is
JSON or CSV with a trailing newline; floats serialize with their shortest
round-trip representation so golden files are stable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import experiments
from .dynamics import equilibrium_efficiency, run_round_robin
from .errors import PoaDesignError, SolverError, ValidationError
from .game import (
    DEFAULT_ENUMERATION_BUDGET,
    Allocation,
    GameInstance,
    exact_poa,
    is_nash,
)
from .lp import (
    STATUS_OPTIMAL,
    solve_optimal_mechanism,
    solve_relaxed,
    verify_feasibility,
)
from .mechanism import (
    UtilityTable,
    coverage_utility,
    equal_shares_utility,
    marginal_contribution_utility,
    universal_utility,
)
from .welfare import CoverageParams, WelfareTable

DEFAULT_ITERATIONS = 100
DEFAULT_INSTANCES = 1000
DEFAULT_VEHICLES = 10


@dataclass(frozen=True)
class RunConfig:
    """A parsed invocation: the subcommand plus its validated flag values."""

    subcommand: str
    options: dict


def _load_welfare(path: str) -> WelfareTable:
    with open(path, "r", encoding="utf-8") as fh:
        return WelfareTable.from_json(fh.read())


def _load_utility(path: str) -> UtilityTable:
    with open(path, "r", encoding="utf-8") as fh:
        return UtilityTable.from_json(fh.read())


def _load_game(path: str) -> GameInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return GameInstance.from_json(json.load(fh))


def _emit(text: str, out: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_grid(spec: str) -> tuple:
    """Either 'start:stop:step' (inclusive) or a comma-separated list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid must be start:stop:step, got {spec!r}")
        start, stop, step = (float(v) for v in parts)
        if step <= 0:
            raise ValidationError(f"grid step must be positive, got {step!r}")
        values = []
        i = 0
        while (value := start + i * step) <= stop + 1e-9:
            values.append(round(value, 10))
            i += 1
        if not values:
            raise ValidationError(f"grid {spec!r} is empty")
        return tuple(values)
    try:
        return tuple(round(float(v), 10) for v in spec.split(","))
    except ValueError as exc:
        raise ValidationError(f"malformed grid {spec!r}: {exc}") from exc


def _parse_start(spec: str, g: GameInstance) -> Allocation:
    if spec == "first":
        return Allocation(tuple(0 for _ in g.actions))
    if spec.startswith("random:"):
        import numpy as np

        seed = int(spec.split(":", 1)[1])
        rng = np.random.default_rng(seed)
        return Allocation(tuple(int(rng.integers(len(pa))) for pa in g.actions))
    raise ValidationError(
        f"--start must be 'first' or 'random:<seed>', got {spec!r}"
    )


def _triplet_list(triplets) -> list:
    return [[t.x, t.y, t.z] for t in triplets]


def _utility_doc(f: UtilityTable) -> dict:
    return {"n": f.n, "values": list(f.values)}


def _cmd_mechanism(opts: dict) -> None:
    kind = opts["kind"]
    if kind == "coverage":
        if opts["n"] is None:
            raise ValidationError("coverage mechanism requires --n")
        result = coverage_utility(
            CoverageParams(opts["alpha"], opts["beta"]), opts["n"]
        )
        doc = {
            "kind": kind,
            "utility": _utility_doc(result.utility),
            "rho": result.rho,
            "poa": result.poa,
        }
    else:
        if opts["welfare"] is None:
            raise ValidationError(f"{kind} mechanism requires --welfare")
        w = _load_welfare(opts["welfare"])
        if kind == "universal":
            c = opts["curvature"]
            utility = universal_utility(w, c)
            rho = 1.0 / (1.0 - c / math.e) if c > 0 else 1.0
            doc = {
                "kind": kind,
                "utility": _utility_doc(utility),
                "rho": rho,
                "poa": 1.0 / rho,
            }
        elif kind == "equal-shares":
            doc = {
                "kind": kind,
                "utility": _utility_doc(equal_shares_utility(w)),
                "rho": None,
                "poa": None,
            }
        else:
            doc = {
                "kind": kind,
                "utility": _utility_doc(marginal_contribution_utility(w)),
                "rho": None,
                "poa": None,
            }
    _emit(json.dumps(doc, indent=2), opts["out"])


def _verify_doc(w: WelfareTable, f: UtilityTable, rho: float) -> dict:
    report = verify_feasibility(w, f, rho)
    return {
        "feasible": report.feasible,
        "rho": rho,
        "max_violation": report.max_violation,
        "worst": [report.worst.x, report.worst.y, report.worst.z],
        "tolerance": report.tolerance,
    }


def _cmd_poa_lp(opts: dict) -> None:
    w = _load_welfare(opts["welfare"])
    if opts["verify"] is not None:
        utility_path, rho_text = opts["verify"]
        doc = _verify_doc(w, _load_utility(utility_path), float(rho_text))
        _emit(json.dumps(doc, indent=2), opts["out"])
        return
    solve = solve_relaxed if opts["relaxed"] else solve_optimal_mechanism
    solution = solve(w)
    if solution.status != STATUS_OPTIMAL:
        raise SolverError(f"linear program ended with status {solution.status!r}")
    doc = {
        "n": w.n,
        "program": "relaxed" if opts["relaxed"] else "full",
        "rho": solution.rho,
        "poa": solution.poa,
        "status": solution.status,
        "utility": _utility_doc(solution.utility),
        "binding_constraints": _triplet_list(solution.binding),
    }
    _emit(json.dumps(doc, indent=2), opts["out"])


def _cmd_analyze(opts: dict) -> None:
    g = _load_game(opts["game"])
    result = exact_poa(g, opts["budget"])
    doc = {
        "players": g.n_players,
        "optimum": {
            "choice": list(result.optimum.choice),
            "welfare": result.optimum_welfare,
        },
        "nash_count": result.nash_count,
        "poa": result.poa,
        "worst_ne": {
            "choice": list(result.worst.choice),
            "welfare": result.poa * result.optimum_welfare,
        },
    }
    _emit(json.dumps(doc, indent=2), opts["out"])


def _cmd_dynamics(opts: dict) -> None:
    g = _load_game(opts["game"])
    a0 = _parse_start(opts["start"], g)
    traj = run_round_robin(g, a0, opts["T"])
    if traj.converged_at is None:
        efficiency = None
    else:
        efficiency = equilibrium_efficiency(g, traj, budget=opts["budget"])
    doc = {
        "start": list(a0.choice),
        "final": list(traj.final.choice),
        "converged_at": traj.converged_at,
        "iterations": opts["T"],
        "nash": bool(is_nash(g, traj.final)),
        "welfare_series": list(traj.welfare_series),
        "efficiency": efficiency,
    }
    _emit(json.dumps(doc, indent=2), opts["out"])


def _plot_path(out: str) -> str:
    stem, dot, _ = out.rpartition(".")
    return (stem if dot else out) + ".png"


def _cmd_fig2(opts: dict) -> None:
    points = experiments.figure2_sweep(opts["pgrid"], opts["n"])
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["p", "optimal", "universal", "bound"])
    for pt in points:
        writer.writerow([pt.p, pt.optimal, pt.universal, pt.bound])
    _emit(buffer.getvalue(), opts["out"])
    if opts["plot"]:
        from .plots import render_figure2

        render_figure2(points, _plot_path(opts["out"]))


def _cmd_fig3(opts: dict) -> None:
    results = []
    for p in opts["p"]:
        cfg = experiments.VehicleTargetConfig(
            n_vehicles=opts["n"],
            p=p,
            master_seed=opts["seed"],
            instances=opts["instances"],
            iterations=opts["T"],
            shared_starts=opts["shared_starts"],
        )
        mc = experiments.run_monte_carlo(cfg, workers=opts["threads"])
        results.append(
            {
                "p": p,
                "mechanisms": {
                    tag: {
                        "stats": experiments.box_stats(ratios).as_dict(),
                        "ratios": list(ratios),
                    }
                    for tag, ratios in mc.ratios.items()
                },
                "failures": [[i, tag] for i, tag in mc.failures],
            }
        )
    doc = {
        "n_vehicles": opts["n"],
        "instances": opts["instances"],
        "iterations": opts["T"],
        "seed": opts["seed"],
        "results": results,
    }
    _emit(json.dumps(doc, indent=2), opts["out"])
    if opts["plot"]:
        from .plots import render_figure3

        stats = {
            entry["p"]: {
                tag: experiments.box_stats(block["ratios"])
                for tag, block in entry["mechanisms"].items()
            }
            for entry in results
        }
        render_figure3(stats, _plot_path(opts["out"]))


def _cmd_verify(opts: dict) -> None:
    doc = _verify_doc(
        _load_welfare(opts["welfare"]), _load_utility(opts["utility"]), opts["rho"]
    )
    _emit(json.dumps(doc, indent=2), opts["out"])


_HANDLERS = {
    "mechanism": _cmd_mechanism,
    "poa-lp": _cmd_poa_lp,
    "analyze": _cmd_analyze,
    "dynamics": _cmd_dynamics,
    "fig2": _cmd_fig2,
    "fig3": _cmd_fig3,
    "verify": _cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poadesign",
        description=(
            "Design and verify local utility functions for resource "
            "allocation games with concave welfare."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("mechanism", help="construct a utility table")
    p.add_argument(
        "--kind",
        choices=("coverage", "universal", "equal-shares", "marginal"),
        default="coverage",
    )
    p.add_argument("--alpha", type=float, default=1.0, help="coverage alpha in [0,1]")
    p.add_argument("--beta", type=int, default=1, help="coverage beta >= 1")
    p.add_argument("--n", type=int, default=None, help="number of players")
    p.add_argument("--welfare", default=None, help="welfare table JSON path")
    p.add_argument("--curvature", type=float, default=1.0, help="curvature bound c")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("poa-lp", help="solve the price-of-anarchy program")
    p.add_argument("--welfare", required=True, help="welfare table JSON path")
    p.add_argument("--relaxed", action="store_true", help="solve the relaxation")
    p.add_argument(
        "--verify",
        nargs=2,
        metavar=("UTILITY", "RHO"),
        default=None,
        help="skip solving; check this utility JSON at this rho",
    )
    p.add_argument("--out", default=None)

    p = sub.add_parser("analyze", help="exact equilibrium analysis of a game")
    p.add_argument("--game", required=True, help="game JSON path")
    p.add_argument("--budget", type=int, default=DEFAULT_ENUMERATION_BUDGET)
    p.add_argument("--out", default=None)

    p = sub.add_parser("dynamics", help="run round-robin best-response dynamics")
    p.add_argument("--game", required=True, help="game JSON path")
    p.add_argument("--T", type=int, default=DEFAULT_ITERATIONS, help="iteration cap")
    p.add_argument(
        "--start", default="first", help="'first' or 'random:<seed>' start state"
    )
    p.add_argument("--budget", type=int, default=DEFAULT_ENUMERATION_BUDGET)
    p.add_argument("--out", default=None)

    p = sub.add_parser("fig2", help="price-of-anarchy sweep as CSV")
    p.add_argument("--pgrid", default="0:1:0.1", help="start:stop:step or list")
    p.add_argument("--n", type=int, default=DEFAULT_VEHICLES)
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p.add_argument(
        "--plot", action="store_true", help="render a PNG alongside the CSV"
    )

    p = sub.add_parser("fig3", help="simulation study as JSON")
    p.add_argument("--p", default="0.5,0.6,0.7", help="comma-separated p values")
    p.add_argument("--n", type=int, default=DEFAULT_VEHICLES)
    p.add_argument("--instances", type=int, default=DEFAULT_INSTANCES)
    p.add_argument("--T", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument(
        "--shared-starts",
        action="store_true",
        help="start all mechanisms from the same allocation",
    )
    p.add_argument("--threads", type=int, default=None, help="worker count")
    p.add_argument("--out", default=None, help="JSON path (stdout if omitted)")
    p.add_argument(
        "--plot", action="store_true", help="render a PNG alongside the JSON"
    )

    p = sub.add_parser("verify", help="check a (welfare, utility, rho) triple")
    p.add_argument("--welfare", required=True)
    p.add_argument("--utility", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--out", default=None)

    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    options = vars(args).copy()
    subcommand = options.pop("subcommand")
    if subcommand in ("fig2", "fig3"):
        if options["plot"] and options["out"] is None:
            parser.error("--plot requires --out")
        try:
            if subcommand == "fig2":
                options["pgrid"] = _parse_grid(options["pgrid"])
            else:
                options["p"] = _parse_grid(options["p"])
        except ValidationError as exc:
            parser.error(str(exc))
    return RunConfig(subcommand, options)


def dispatch(cfg: RunConfig) -> int:
    _HANDLERS[cfg.subcommand](cfg.options)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_config(argv)
    try:
        return dispatch(cfg)
    except (PoaDesignError, OSError, json.JSONDecodeError) as exc:
        error = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(error) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
