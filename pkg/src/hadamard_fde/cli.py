"""Command-line front end.

Exit status: 0 success, 1 domain/validation error or failed check,
2 non-convergence, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import GronwallInput, gronwall_series_bound
from .config import ProblemSpec, parse_problem_spec
from .errors import ConvergenceError, HadamardFDEError
from .experiments import (
    epsilon_perturbation_experiment,
    format_number,
    grid_convergence_study,
    linear_closed_form,
    order_perturbation_experiment,
)
from .expression import parse_rhs_expression
from .grid import LogGrid, WeightedSamples
from .identities import run_identity_checks
from .solver import solve_cauchy

log = logging.getLogger("hadamard_fde")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CONVERGENCE = 2
EXIT_USAGE = 64

LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else format_number(v) for v in row])


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_spec(path) -> ProblemSpec:
    return parse_problem_spec(Path(path).read_bytes())


def _spec_with_nodes(spec: ProblemSpec, nodes) -> ProblemSpec:
    return spec if nodes is None else spec.with_changes(grid_nodes=nodes)


def cmd_solve(args) -> int:
    spec = _spec_with_nodes(_load_spec(args.spec), args.nodes)
    problem, grid = spec.build()
    report = solve_cauchy(problem, grid, tol=spec.tol, max_iter=spec.max_iter,
                          omega_target=spec.omega_target)
    x = report.solution
    raw = x.raw()
    u = grid.u_values
    rows = [(t, ui, w, r if np.isfinite(r) else "inf") for t, ui, w, r in zip(grid.t_values, u, x.values, raw)]
    _write_csv(args.out, ["t", "u", "weighted_value", "raw_value"], rows)
    if args.json:
        _write_json(args.json, {
            "subintervals": report.subintervals,
            "breakpoints": report.plan.breakpoints.tolist(),
            "omegas": report.plan.omegas.tolist(),
            "iterations": report.iterations,
            "final_deltas": report.final_deltas,
            "residual_norm": report.residual_norm,
            "weight": x.mu,
        })
    print(f"solve: nodes={grid.node_count} K={report.subintervals} subintervals "
          f"max_omega={float(np.max(report.plan.omegas)):.6g} "
          f"iterations={sum(report.iterations)} residual_norm={report.residual_norm:.6e}")
    return EXIT_OK


def cmd_verify(args) -> int:
    rows = run_identity_checks(args.alpha, args.nodes, args.a, args.b, args.alpha2)
    width = max(len(r.name) for r in rows)
    print(f"{'check':<{width}}  {'max_rel_error':>13}  {'threshold':>9}  result")
    for r in rows:
        print(f"{r.name:<{width}}  {r.error:13.3e}  {r.threshold:9.1e}  {'pass' if r.passed else 'FAIL'}")
    if args.out:
        _write_csv(args.out, ["check", "max_rel_error", "threshold", "passed"],
                   [(r.name, r.error, r.threshold, str(r.passed).lower()) for r in rows])
    failed = [r.name for r in rows if not r.passed]
    print(f"verify-identities: alpha={args.alpha} nodes={args.nodes} "
          f"{len(rows) - len(failed)}/{len(rows)} within threshold")
    return EXIT_OK if not failed else EXIT_ERROR


def _samples_from_expression(text: str, grid: LogGrid, name: str) -> np.ndarray:
    expr = parse_rhs_expression(text)
    if "x" in expr.variables():
        raise UsageError(f"--{name} may only depend on t")
    return np.broadcast_to(np.asarray(expr(grid.t_values, 0.0), dtype=float), (grid.node_count,)).copy()


def cmd_gronwall(args) -> int:
    grid = LogGrid(args.a, args.b, args.nodes)
    u_vals = _samples_from_expression(args.u, grid, "u")
    psi = _samples_from_expression(args.psi, grid, "psi")
    bound = gronwall_series_bound(GronwallInput(grid, u_vals, psi, args.alpha,
                                                series_tol=args.series_tol))
    _write_csv(args.out, ["t", "u", "bound"], zip(grid.t_values, u_vals, bound.values))
    print(f"gronwall: alpha={args.alpha} nodes={grid.node_count} bound_at_b={bound.values[-1]:.17g}")
    return EXIT_OK


def _experiment_output(args, report, label: str) -> int:
    report.write_csv(args.out)
    if args.json:
        payload = dict(report.metadata)
        payload.update({"verdict": report.verdict, "slack": report.slack,
                        "min_margin": float(np.min(report.margin))})
        _write_json(args.json, payload)
    print(f"{label}: verdict={'true' if report.verdict else 'false'} probes={report.probe_times.size} "
          f"min_margin={float(np.min(report.margin)):.6e} slack={report.slack:.3e}")
    return EXIT_OK if report.verdict else EXIT_ERROR


def cmd_perturb_order(args) -> int:
    spec = _spec_with_nodes(_load_spec(args.spec), args.nodes)
    problem, grid = spec.build()
    report = order_perturbation_experiment(problem, args.delta, grid, args.probes, x_tilde_a=args.x_tilde,
                                           tol=spec.tol, max_iter=spec.max_iter,
                                           omega_target=spec.omega_target)
    return _experiment_output(args, report, "perturb-order")


def cmd_perturb_ic(args) -> int:
    spec = _spec_with_nodes(_load_spec(args.spec), args.nodes)
    problem, grid = spec.build()
    report = epsilon_perturbation_experiment(problem, args.epsilon, grid, args.probes, tol=spec.tol,
                                             max_iter=spec.max_iter, omega_target=spec.omega_target)
    return _experiment_output(args, report, "perturb-ic")


def _node_list(text: str) -> list[int]:
    try:
        counts = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if len(counts) < 2:
        raise argparse.ArgumentTypeError("need at least two node counts")
    return counts


def cmd_converge(args) -> int:
    spec = _load_spec(args.spec)
    problem, _ = spec.build()
    rows = grid_convergence_study(problem, args.nodes, linear_closed_form(problem), tol=spec.tol,
                                  max_iter=spec.max_iter, omega_target=spec.omega_target)
    _write_csv(args.out, ["nodes", "h", "error", "order"],
               [(str(r.nodes), r.h, r.error, r.order) for r in rows])
    last = rows[-1]
    print(f"converge: sizes={len(rows)} final_error={last.error:.6e} final_order={last.order:.4g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hadamard-fde", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("solve", help="solve a problem spec and write the trajectory")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--nodes", type=int)
    p.add_argument("--json", help="optional JSON file with plan and iteration data")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify-identities", help="compare operators against closed forms")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--alpha2", type=float, default=0.7, help="second order in the semigroup check")
    p.add_argument("--nodes", type=int, default=1025)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=math.e)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gronwall", help="evaluate the Gronwall series bound")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--u", required=True, help="expression in t for u(t)")
    p.add_argument("--psi", required=True, help="expression in t for psi(t)")
    p.add_argument("--nodes", type=int, default=257)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=math.e)
    p.add_argument("--series-tol", type=float, default=1e-12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gronwall)

    for name, func, extra in (("perturb-order", cmd_perturb_order, "--delta"),
                              ("perturb-ic", cmd_perturb_ic, "--epsilon")):
        p = sub.add_parser(name, help=f"paired solves vs. dependence bound ({extra[2:]})")
        p.add_argument("--spec", required=True)
        p.add_argument(extra, type=float, required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--probes", type=int, default=32)
        p.add_argument("--nodes", type=int)
        p.add_argument("--json", help="optional JSON sidecar with verdict and metadata")
        if name == "perturb-order":
            p.add_argument("--x-tilde", type=float, help="initial value of the perturbed problem")
        p.set_defaults(func=func)

    p = sub.add_parser("converge", help="grid refinement study against the linear closed form")
    p.add_argument("--spec", required=True)
    p.add_argument("--nodes", type=_node_list, default=[129, 257, 513, 1025, 2049])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_converge)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("FDE_LOG_LEVEL", "quiet").strip().lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"FDE_LOG_LEVEL must be one of {sorted(LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def run_command(argv=None) -> int:
    """Run one CLI command and return its exit status."""
    try:
        _configure_logging()
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (HadamardFDEError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
