r"""Picard solver for the Volterra form of Hilfer-Hadamard Cauchy problems.

The problem is solved as

.. math:: x(t) = x_0(t) + I^\alpha[\phi(\cdot, x)](t),\qquad
          x_0(t) = \sum_{k=1}^n x_{a_k} \frac{(\log(t/a))^{\gamma-k}}{\Gamma(\gamma-k+1)}.

Discretisation detail: the integrand is split as
``phi(t, x0 + y) = phi(t, x0) + [phi(t, x0 + y) - phi(t, x0)]``.  The first
part is known in advance and is integrated once with the solution weight
``mu = n - gamma``.  The unknown is ``y = x - x0``, which is less singular at
``a`` (weight ``max(0, mu - alpha)``), so its increment is interpolated in a
space where it is nearly smooth.  For linear ``phi`` the known part is
integrated exactly, which is what makes the scheme accurate for small
``gamma``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, EvaluationError, PlanningError, ShapeError
from .grid import FractionalOrder, LogGrid, WeightedSamples
from .operators import default_integral_weight
from .quadrature import apply_integral, integral_limit_at_a, product_weights
from .special import log_gamma, reciprocal_gamma

log = logging.getLogger(__name__)

__all__ = [
    "CauchyProblem",
    "SolverReport",
    "SubdivisionPlan",
    "apply_picard_operator",
    "assemble_initial_term",
    "contraction_coefficient",
    "plan_subdivision",
    "solve_cauchy",
    "vie_residual",
]

# Relative size (in units of h) of the point used to read off limits at t = a.
_PROBE = 1e-8
# Anything beyond this many subintervals is treated as an underflowed step.
_MAX_STEPS = 1e8


@dataclass(frozen=True)
class CauchyProblem:
    """Orders, interval, initial data ``x_{a_1..a_n}``, right-hand side and its Lipschitz constant."""

    ord: FractionalOrder
    a: float
    b: float
    initial_values: tuple
    rhs: Callable
    lipschitz: float

    def __post_init__(self):
        values = tuple(float(v) for v in np.atleast_1d(self.initial_values))
        object.__setattr__(self, "initial_values", values)
        if len(values) != self.ord.n:
            raise ShapeError(f"expected {self.ord.n} initial values, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise DomainError("initial values must be finite")
        if not (math.isfinite(self.lipschitz) and self.lipschitz > 0):
            raise DomainError(f"lipschitz must be > 0, got {self.lipschitz!r}")
        if not (0 < self.a < self.b and math.isfinite(self.b)):
            raise DomainError(f"need 0 < a < b, got a={self.a!r}, b={self.b!r}")

    def with_changes(self, **changes) -> "CauchyProblem":
        fields = dict(ord=self.ord, a=self.a, b=self.b, initial_values=self.initial_values,
                      rhs=self.rhs, lipschitz=self.lipschitz)
        fields.update(changes)
        return CauchyProblem(**fields)


@dataclass(frozen=True)
class SubdivisionPlan:
    breakpoints: np.ndarray
    omegas: np.ndarray
    node_indices: np.ndarray | None = None

    @property
    def intervals(self) -> int:
        return len(self.omegas)


@dataclass
class SolverReport:
    solution: WeightedSamples
    plan: SubdivisionPlan
    iterations: list[int]
    final_deltas: list[float]
    residual_norm: float
    update_history: list[list[float]] = field(default_factory=list)

    @property
    def subintervals(self) -> int:
        return self.plan.intervals


def contraction_coefficient(p: CauchyProblem) -> float:
    """``L * Gamma(gamma-n+1) / Gamma(alpha+gamma-n+1)``; omega = coefficient * du**alpha."""
    o = p.ord
    shift = o.gamma_val - o.n + 1.0
    return p.lipschitz * math.exp(log_gamma(shift) - log_gamma(o.alpha + shift))


def initial_term_weighted(p: CauchyProblem, u: np.ndarray) -> np.ndarray:
    """``u**(n-gamma) * x0`` as a function of the log variable (exact at u = 0)."""
    o = p.ord
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for k, xk in enumerate(p.initial_values, start=1):
        if xk != 0.0:
            out = out + xk * reciprocal_gamma(o.gamma_val - k + 1.0) * u ** (o.n - k)
    return out


def assemble_initial_term(p: CauchyProblem, grid: LogGrid) -> WeightedSamples:
    """Weighted samples of ``x0``; the value at ``a`` is ``x_{a_n} / Gamma(gamma - n + 1)``."""
    _check_grid(p, grid)
    return WeightedSamples(grid, p.ord.mu, initial_term_weighted(p, grid.u_values))


def _check_grid(p: CauchyProblem, grid: LogGrid) -> None:
    if not (math.isclose(grid.a, p.a, rel_tol=1e-14) and math.isclose(grid.b, p.b, rel_tol=1e-14)):
        raise ShapeError(f"grid spans [{grid.a}, {grid.b}] but the problem lives on [{p.a}, {p.b}]")


def _call_rhs(p: CauchyProblem, t: np.ndarray, x: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(p.rhs(t, x), dtype=float)
    except EvaluationError as exc:
        if exc.index is not None and np.ndim(t):
            k = int(exc.index)
            raise exc.at(f"node {int(nodes[k])} (t={float(t[k]):.17g}, x={float(x[k]):.17g})") from None
        raise
    out = np.broadcast_to(out, np.shape(x))
    bad = ~np.isfinite(out)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise EvaluationError("right-hand side returned a non-finite value",
                              location=f"node {int(nodes[k])} (t={float(t[k]):.17g})")
    return np.array(out)


class _Discretization:
    """Everything about ``x = x0 + I^alpha phi(x)`` that does not change between sweeps."""

    def __init__(self, p: CauchyProblem, grid: LogGrid):
        _check_grid(p, grid)
        self.p = p
        self.grid = grid
        o = p.ord
        self.alpha = o.alpha
        self.mu = o.mu
        self.mu_y = default_integral_weight(o.alpha, o.mu)
        u = grid.u_values
        self.u = u
        self.t = grid.t_values
        n = grid.node_count
        self.nodes = np.arange(n)
        # factor turning weighted-y into weighted-x, u^(mu - mu_y)
        self.lift = np.ones(n)
        if self.mu != self.mu_y:
            self.lift = u ** (self.mu - self.mu_y)
        self.drop = np.ones(n)
        if self.mu_y:
            self.drop[1:] = u[1:] ** (-self.mu_y)
            self.drop[0] = np.nan

        self.x0w = initial_term_weighted(p, u)
        self.x0_raw = np.full(n, np.nan)
        self.x0_raw[1:] = self.x0w[1:] / (u[1:] ** self.mu if self.mu else 1.0)
        if self.mu == 0:
            self.x0_raw[0] = self.x0w[0]

        self.u_probe = _PROBE * grid.h
        self.t_probe = p.a * math.exp(self.u_probe)
        self.x0_probe = float(initial_term_weighted(p, np.array([self.u_probe]))[0]) * self.u_probe ** (-self.mu)

        self.phi_x0 = np.empty(n)
        self.phi_x0[1:] = _call_rhs(p, self.t[1:], self.x0_raw[1:], self.nodes[1:])
        gx0 = np.empty(n)
        gx0[1:] = self.phi_x0[1:] * (u[1:] ** self.mu if self.mu else 1.0)
        if self.mu == 0:
            self.phi_x0[0] = _call_rhs(p, self.t[:1], self.x0_raw[:1], self.nodes[:1])[0]
            gx0[0] = self.phi_x0[0]
        else:
            gx0[0] = self.u_probe ** self.mu * self._rhs_at_probe(self.x0_probe)
        self.known = apply_integral(gx0, u, self.alpha, self.mu, self.mu_y)

        W = product_weights(n, grid.h, self.alpha, self.mu_y)
        self.W = W * u[:, None] ** self.mu_y if self.mu_y else W
        self.y0 = float(self.known[0])

    def _rhs_at_probe(self, x: float) -> float:
        try:
            return float(np.asarray(self.p.rhs(np.array([self.t_probe]), np.array([x])), dtype=float)[0])
        except EvaluationError as exc:
            raise exc.at(f"t=a (limit probe at t={self.t_probe:.17g})") from None

    def increment(self, y: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Weighted ``phi(t, x0 + y) - phi(t, x0)`` at the nodes ``idx``."""
        out = np.empty(idx.shape[0])
        inner = idx > 0
        if np.any(inner):
            j = idx[inner]
            x = self.x0_raw[j] + y[j] * self.drop[j]
            diff = _call_rhs(self.p, self.t[j], x, j) - self.phi_x0[j]
            out[inner] = diff * (self.u[j] ** self.mu_y if self.mu_y else 1.0)
        if not np.all(inner):
            out[~inner] = self._increment_at_a(float(y[0]))
        return out

    def _increment_at_a(self, y0: float) -> float:
        if self.mu == 0:
            x0 = self.x0_raw[0]
            return float(_call_rhs(self.p, self.t[:1], np.array([x0 + y0]), self.nodes[:1])[0] - self.phi_x0[0])
        up = self.u_probe
        x0 = self.x0_probe
        y = y0 * up ** (-self.mu_y)
        return up ** self.mu_y * (self._rhs_at_probe(x0 + y) - self._rhs_at_probe(x0))

    def x_weighted(self, y: np.ndarray) -> np.ndarray:
        x = self.x0w + y * self.lift
        if self.mu != self.mu_y:
            x[0] = self.x0w[0]
        return x

    def y_from_x(self, x: np.ndarray) -> np.ndarray:
        y = np.empty_like(x)
        y[1:] = (x[1:] - self.x0w[1:]) / self.lift[1:]
        y[0] = x[0] - self.x0w[0] if self.mu == self.mu_y else self.y0
        return y

    def apply(self, y: np.ndarray) -> np.ndarray:
        """One global sweep: ``known + I^alpha[increment(y)]`` in weighted-y form."""
        d = self.increment(y, self.nodes)
        return self.known + self.W @ d


def plan_subdivision(p: CauchyProblem, omega_target: float = 0.5,
                     grid: LogGrid | None = None) -> SubdivisionPlan:
    """Greedy left-to-right subdivision with every contraction factor at most ``omega_target``.

    Without a grid the step ``du`` solves ``omega(du) = omega_target``
    exactly. With a grid, breakpoints are snapped down to whole numbers of
    grid steps so every subinterval ends on a node.
    """
    if not (0.0 < omega_target < 1.0):
        raise DomainError(f"omega_target must lie in (0, 1), got {omega_target!r}")
    coef = contraction_coefficient(p)
    alpha = p.ord.alpha
    total = math.log(p.b / p.a)
    log_du = (math.log(omega_target) - math.log(coef)) / alpha
    du = math.exp(log_du) if log_du < 700 else math.inf
    required = total / du if du > 0 else math.inf
    if not math.isfinite(required) or required > _MAX_STEPS:
        raise PlanningError(
            f"admissible step du={du:.3g} needs {required:.3g} subintervals (L={p.lipschitz:.3g})",
            required_steps=required,
        )
    if grid is None:
        cuts = [0.0]
        while total - cuts[-1] > du * (1.0 + 1e-12):
            cuts.append(cuts[-1] + du)
        cuts.append(total)
        u_cuts = np.array(cuts)
        omegas = coef * np.diff(u_cuts) ** alpha
        return SubdivisionPlan(p.a * np.exp(u_cuts), omegas)

    _check_grid(p, grid)
    last = grid.node_count - 1
    step = int(math.floor(du / grid.h * (1.0 + 1e-12)))
    if step < 1:
        raise PlanningError(
            f"grid spacing h={grid.h:.3g} exceeds the admissible step du={du:.3g}; "
            f"use at least {math.ceil(total / du) + 1} nodes",
            required_steps=required,
        )
    idx = list(range(0, last, step)) + [last]
    idx = np.array(idx)
    u_cuts = grid.u_values[idx]
    omegas = coef * np.diff(u_cuts) ** alpha
    return SubdivisionPlan(grid.t_values[idx], omegas, idx)


def _sweep_interval(disc: _Discretization, y: np.ndarray, d: np.ndarray, lo: int, hi: int,
                    tol: float, max_iter: int, omega: float, interval: int) -> tuple[int, float, list[float]]:
    idx = np.arange(lo + 1, hi + 1)
    history = disc.known[idx] + disc.W[idx, :lo] @ d[:lo]
    block = disc.W[idx, lo:hi + 1]
    lift = disc.lift[idx]
    updates: list[float] = []
    for sweep in range(1, max_iter + 1):
        d[idx] = disc.increment(y, idx)
        new = history + block @ d[lo:hi + 1]
        update = float(np.max(np.abs(new - y[idx]) * lift))
        y[idx] = new
        updates.append(update)
        if update < tol:
            d[idx] = disc.increment(y, idx)
            return sweep, update, updates
    raise ConvergenceError(
        f"Picard iteration on subinterval {interval} did not converge in {max_iter} sweeps "
        f"(last update {updates[-1]:.3e}, omega={omega:.3g})",
        last_update=updates[-1],
        context={"interval": interval, "omega": omega, "updates": updates},
    )


def solve_cauchy(p: CauchyProblem, grid: LogGrid, tol: float = 1e-10, max_iter: int = 200,
                 omega_target: float = 0.5) -> SolverReport:
    """Solve on ``grid`` subinterval by subinterval with Picard iteration.

    On each subinterval the history over already solved nodes is computed
    once; the initial guess continues the left endpoint's weighted value.
    """
    if not (tol > 0):
        raise DomainError(f"tol must be positive, got {tol!r}")
    if int(max_iter) != max_iter or max_iter < 1:
        raise DomainError(f"max_iter must be a positive integer, got {max_iter!r}")
    plan = plan_subdivision(p, omega_target, grid)
    disc = _Discretization(p, grid)
    n = grid.node_count
    y = np.zeros(n)
    y[0] = disc.y0
    d = np.zeros(n)
    d[0] = disc.increment(y, np.array([0]))[0]

    iterations: list[int] = []
    deltas: list[float] = []
    history: list[list[float]] = []
    idx = plan.node_indices
    for i, (lo, hi) in enumerate(zip(idx[:-1], idx[1:])):
        # warm start: constant continuation of x_w at the left node
        x_left = disc.x_weighted(y)[lo]
        seg = np.arange(lo + 1, hi + 1)
        y[seg] = (x_left - disc.x0w[seg]) / disc.lift[seg]
        count, last, updates = _sweep_interval(disc, y, d, int(lo), int(hi), tol, max_iter,
                                               float(plan.omegas[i]), i)
        iterations.append(count)
        deltas.append(last)
        history.append(updates)
        log.debug("subinterval %d [%d, %d]: %d sweeps, last update %.3e", i, lo, hi, count, last)

    solution = WeightedSamples(grid, disc.mu, disc.x_weighted(y))
    residual = _residual(disc, solution.values)
    log.info("solved on %d nodes: %d subintervals, residual %.3e", n, plan.intervals, residual)
    return SolverReport(solution, plan, iterations, deltas, residual, history)


def _residual(disc: _Discretization, x: np.ndarray) -> float:
    y = disc.y_from_x(np.asarray(x, dtype=float))
    image = disc.x_weighted(disc.apply(y))
    return float(np.max(np.abs(np.asarray(x) - image)))


def vie_residual(p: CauchyProblem, x: WeightedSamples) -> float:
    """Weighted sup-norm of ``x - x0 - I^alpha phi(., x)`` on the grid of ``x``."""
    if abs(x.mu - p.ord.mu) > 1e-15:
        raise DomainError(f"solution samples must carry weight n-gamma={p.ord.mu}, got {x.mu}")
    return _residual(_Discretization(p, x.grid), x.values)


def apply_picard_operator(p: CauchyProblem, x_prev: WeightedSamples, base_term: WeightedSamples,
                          left: float) -> WeightedSamples:
    """One Picard sweep ``base_term + I^alpha_{left+}[phi(., x_prev)]`` on ``[left, b]``.

    ``left`` must be a grid node. Nodes before ``left`` keep ``base_term``.
    Unlike :func:`solve_cauchy` this applies the operator literally, with
    the whole integrand interpolated in the solution weight.
    """
    grid = x_prev.grid
    if base_term.grid != grid:
        raise ShapeError("x_prev and base_term live on different grids")
    _check_grid(p, grid)
    mu = p.ord.mu
    if x_prev.mu != mu or base_term.mu != mu:
        raise DomainError(f"samples must carry the solution weight {mu}")
    t = grid.t_values
    lo = int(np.argmin(np.abs(t - left)))
    if not math.isclose(t[lo], left, rel_tol=1e-12):
        raise DomainError(f"left={left!r} is not a grid node")
    u = grid.u_values
    nodes = np.arange(grid.node_count)
    out = np.array(base_term.values)
    seg = slice(lo, None)
    us = u[seg] - u[lo]
    if lo == 0:
        raw = np.empty(grid.node_count)
        raw[1:] = x_prev.values[1:] / (u[1:] ** mu if mu else 1.0)
        g = np.empty(grid.node_count)
        g[1:] = _call_rhs(p, t[1:], raw[1:], nodes[1:]) * (u[1:] ** mu if mu else 1.0)
        if mu == 0:
            g[0] = _call_rhs(p, t[:1], x_prev.values[:1], nodes[:1])[0]
        else:
            disc_probe = _PROBE * grid.h
            x_probe = x_prev.values[0] * disc_probe ** (-mu)
            g[0] = disc_probe ** mu * float(_call_rhs(p, np.array([p.a * math.exp(disc_probe)]),
                                                      np.array([x_probe]), nodes[:1])[0])
        integral = apply_integral(g, u, p.ord.alpha, mu, mu)
    else:
        raw = x_prev.values[seg] / u[seg] ** mu
        g = _call_rhs(p, t[seg], raw, nodes[seg])
        integral = apply_integral(g, us, p.ord.alpha, 0.0, 0.0) * u[seg] ** mu
    out[seg] += integral
    return WeightedSamples(grid, mu, out)
