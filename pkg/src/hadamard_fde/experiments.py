"""Paired solves checked against the dependence bounds, and grid refinement studies."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bounds import PerturbationSpec, dependence_envelope_samples, epsilon_ml_bound
from .errors import ConvergenceError, DomainError, ShapeError
from .grid import FractionalOrder, LogGrid, WeightedSamples
from .rhs import ConstantRhs, LinearRhs
from .solver import CauchyProblem, SolverReport, solve_cauchy
from .special import MLParams, mittag_leffler

log = logging.getLogger(__name__)

__all__ = [
    "ConvergenceRow",
    "ExperimentReport",
    "epsilon_perturbation_experiment",
    "format_number",
    "grid_convergence_study",
    "linear_closed_form",
    "order_perturbation_experiment",
    "probe_indices",
]

BOUNDARY_LAYER = 0.05
DEFAULT_PROBES = 32
SLACK_FACTOR = 10.0


def format_number(value: float) -> str:
    return format(float(value), ".17g")


@dataclass
class ExperimentReport:
    probe_times: np.ndarray
    measured_gap: np.ndarray
    envelope: np.ndarray
    margin: np.ndarray
    verdict: bool
    slack: float
    metadata: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "measured_gap", "envelope", "margin"])
        for row in zip(self.probe_times, self.measured_gap, self.envelope, self.margin):
            writer.writerow([format_number(v) for v in row])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.csv_text())


def probe_indices(grid: LogGrid, count: int = DEFAULT_PROBES, layer: float = BOUNDARY_LAYER) -> np.ndarray:
    """Grid nodes nearest to ``count`` geometrically spaced points in ``[layer*U, U]`` (u variable)."""
    if count < 1:
        raise ShapeError("need at least one probe")
    U = grid.length
    targets = np.geomspace(layer * U, U, count)
    idx = np.clip(np.rint(targets / grid.h).astype(int), 1, grid.node_count - 1)
    first = int(math.ceil(layer * U / grid.h - 1e-9))
    idx = np.maximum(idx, first)
    return np.unique(idx)


def _solve(p: CauchyProblem, grid: LogGrid, label: str, **kw) -> SolverReport:
    try:
        return solve_cauchy(p, grid, **kw)
    except ConvergenceError as exc:
        exc.context["problem"] = label
        raise ConvergenceError(f"{label} problem: {exc}", last_update=exc.last_update,
                               context=exc.context) from None


def _raw_at(x: WeightedSamples, idx: np.ndarray) -> np.ndarray:
    u = x.grid.u_values[idx]
    return x.values[idx] / (u ** x.mu if x.mu else 1.0)


def _coarse_grid(grid: LogGrid) -> LogGrid | None:
    if grid.node_count < 5 or (grid.node_count - 1) % 2:
        return None
    return LogGrid(grid.a, grid.b, (grid.node_count - 1) // 2 + 1)


def _gap(x_pert: WeightedSamples, x_base: WeightedSamples, idx: np.ndarray) -> np.ndarray:
    return np.abs(_raw_at(x_pert, idx) - _raw_at(x_base, idx))


def _quadrature_error(base: CauchyProblem, pert: CauchyProblem, fine: tuple[SolverReport, SolverReport],
                      grid: LogGrid, idx: np.ndarray, kw: dict) -> float:
    """Change of the measured gap when both problems are re-solved on every other node.

    Probes at odd nodes are compared through their even neighbour, which
    is a node of the coarse grid.
    """
    coarse = _coarse_grid(grid)
    if coarse is None:
        return 0.0
    even = idx - idx % 2
    rough_base = _solve(base, coarse, "base (half grid)", **kw)
    rough_pert = _solve(pert, coarse, "perturbed (half grid)", **kw)
    fine_gap = _gap(fine[1].solution, fine[0].solution, even)
    rough_gap = _gap(rough_pert.solution, rough_base.solution, even // 2)
    return float(np.max(np.abs(fine_gap - rough_gap)))


def _phi_sup(p: CauchyProblem, x: WeightedSamples) -> float:
    idx = np.arange(1, x.grid.node_count)
    raw = _raw_at(x, idx)
    return float(np.max(np.abs(np.asarray(p.rhs(x.grid.t_values[idx], raw), dtype=float))))


def _solver_kw(tol: float, max_iter: int, omega_target: float) -> dict:
    return {"tol": tol, "max_iter": max_iter, "omega_target": omega_target}


def _finish(grid, idx, gap, env, tol, qerr, slack_factor, meta) -> ExperimentReport:
    slack = slack_factor * (tol + qerr)
    margin = env - gap
    verdict = bool(np.all(margin >= -slack))
    meta.update({"quadrature_error": qerr, "slack": slack, "probes": int(idx.size),
                 "grid_nodes": grid.node_count})
    return ExperimentReport(grid.t_values[idx], gap, env, margin, verdict, slack, meta)


def order_perturbation_experiment(base: CauchyProblem, delta: float, grid: LogGrid,
                                  probes: int = DEFAULT_PROBES, x_tilde_a: float | None = None,
                                  tol: float = 1e-10, max_iter: int = 200, omega_target: float = 0.5,
                                  slack_factor: float = SLACK_FACTOR) -> ExperimentReport:
    """Solve the base problem and the one with order ``alpha - delta`` (same beta), compare with the envelope.

    ``x_tilde_a`` defaults to the base initial value; passing a different
    value perturbs order and initial datum together.
    """
    o = base.ord
    if o.n != 1:
        raise DomainError("order perturbation experiments need n = 1")
    ap = o.alpha - delta
    if not (0.0 < ap <= 1.0) or delta < 0:
        raise DomainError(f"0 < alpha - delta <= 1 violated (alpha={o.alpha}, delta={delta})")
    x_a = base.initial_values[0]
    xt = x_a if x_tilde_a is None else float(x_tilde_a)
    pert = base.with_changes(ord=FractionalOrder.of(ap, o.beta), initial_values=(xt,))
    kw = _solver_kw(tol, max_iter, omega_target)

    t0 = time.perf_counter()
    sol = _solve(base, grid, "base", **kw)
    sol_p = _solve(pert, grid, "perturbed", **kw)
    t_solve = time.perf_counter() - t0
    idx = probe_indices(grid, probes)
    gap = _gap(sol_p.solution, sol.solution, idx)
    spec = PerturbationSpec(delta, xt - x_a, base, _phi_sup(base, sol.solution))
    env_w = dependence_envelope_samples(spec, grid, o.beta)
    env = _raw_at(env_w, idx)
    qerr = _quadrature_error(base, pert, (sol, sol_p), grid, idx, kw)
    meta = {
        "experiment": "order", "alpha": o.alpha, "beta": o.beta, "delta": delta,
        "x_a": x_a, "x_tilde_a": xt, "lipschitz": base.lipschitz, "phi_sup": spec.phi_sup,
        "solve_seconds": t_solve,
    }
    return _finish(grid, idx, gap, env, tol, qerr, slack_factor, meta)


def epsilon_perturbation_experiment(base: CauchyProblem, epsilon: float, grid: LogGrid,
                                    probes: int = DEFAULT_PROBES, tol: float = 1e-10,
                                    max_iter: int = 200, omega_target: float = 0.5,
                                    slack_factor: float = SLACK_FACTOR) -> ExperimentReport:
    """Shift the initial value by ``epsilon`` and compare the gap with the Mittag-Leffler bound.

    Gaps and bounds are raw values; the weighted gaps go into the metadata.
    """
    o = base.ord
    if o.n != 1:
        raise DomainError("initial-value perturbation experiments need n = 1")
    x_a = base.initial_values[0]
    pert = base.with_changes(initial_values=(x_a + epsilon,))
    kw = _solver_kw(tol, max_iter, omega_target)
    t0 = time.perf_counter()
    sol = _solve(base, grid, "base", **kw)
    sol_p = _solve(pert, grid, "perturbed", **kw)
    t_solve = time.perf_counter() - t0
    idx = probe_indices(grid, probes)
    gap = _gap(sol_p.solution, sol.solution, idx)
    weighted_gap = np.abs(sol_p.solution.values - sol.solution.values)
    t = grid.t_values[idx]
    env = np.array([epsilon_ml_bound(o, base.lipschitz, epsilon, base.a, ti) for ti in t])
    qerr = _quadrature_error(base, pert, (sol, sol_p), grid, idx, kw)
    meta = {
        "experiment": "epsilon", "alpha": o.alpha, "beta": o.beta, "epsilon": epsilon,
        "x_a": x_a, "lipschitz": base.lipschitz, "solve_seconds": t_solve,
        "weighted_gap_max": float(np.max(weighted_gap)),
        "weighted_gap_at_probes": weighted_gap[idx].tolist(),
        "gap_at_b": float(abs(_raw_at(sol_p.solution, np.array([grid.node_count - 1]))[0]
                              - _raw_at(sol.solution, np.array([grid.node_count - 1]))[0])),
        "bound_at_b": epsilon_ml_bound(o, base.lipschitz, epsilon, base.a, grid.b),
    }
    return _finish(grid, idx, gap, env, tol, qerr, slack_factor, meta)


def linear_closed_form(p: CauchyProblem) -> Callable[[np.ndarray], np.ndarray]:
    """Weighted exact solution ``u -> u**(n-gamma) x(u)`` for ``phi = lam*x`` or ``phi = 0``.

    ``x = sum_k x_{a_k} u**(gamma-k) E_{alpha, gamma-k+1}(lam u**alpha)``.
    """
    rhs = p.rhs
    if isinstance(rhs, LinearRhs):
        lam = rhs.lam
    elif isinstance(rhs, ConstantRhs) and rhs.value == 0.0:
        lam = 0.0
    else:
        raise DomainError("closed-form oracle available only for linear or zero right-hand sides")
    o = p.ord

    def oracle(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for k, xk in enumerate(p.initial_values, start=1):
            if xk == 0.0:
                continue
            params = MLParams(o.alpha, o.gamma_val - k + 1.0)
            ml = np.array([mittag_leffler(params, lam * v ** o.alpha) for v in u])
            out += xk * u ** (o.n - k) * ml
        return out

    return oracle


@dataclass(frozen=True)
class ConvergenceRow:
    nodes: int
    h: float
    error: float
    order: float


def grid_convergence_study(p: CauchyProblem, node_counts: Sequence[int],
                           oracle: Callable[[np.ndarray], np.ndarray] | None = None,
                           tol: float = 1e-10, max_iter: int = 200,
                           omega_target: float = 0.5) -> list[ConvergenceRow]:
    """Weighted sup-norm error against ``oracle`` for each grid size.

    ``order`` compares consecutive rows, ``log(err_i/err_{i+1}) / log(h_i/h_{i+1})``
    (``log2`` of the error ratio when node counts double); NaN in the first row.
    """
    counts = [int(c) for c in node_counts]
    if len(counts) < 2:
        raise ShapeError("a convergence study needs at least two grid sizes")
    if oracle is None:
        oracle = linear_closed_form(p)
    rows: list[ConvergenceRow] = []
    for n in counts:
        grid = LogGrid(p.a, p.b, n)
        report = solve_cauchy(p, grid, tol=tol, max_iter=max_iter, omega_target=omega_target)
        err = float(np.max(np.abs(report.solution.values - oracle(grid.u_values))))
        order = math.nan
        if rows and err > 0 and rows[-1].error > 0:
            order = math.log(rows[-1].error / err) / math.log(rows[-1].h / grid.h)
        rows.append(ConvergenceRow(n, grid.h, err, order))
    return rows
