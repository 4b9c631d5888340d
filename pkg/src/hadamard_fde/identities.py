"""Closed-form checks of the discrete operators (used by the CLI and the test-suite)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import LogGrid
from .operators import hadamard_integral, power_log_integral_closed_form, power_log_samples

POWER_EXPONENTS = (0.5, 1.0, 1.5, 2.0)
POWER_THRESHOLD = 1e-4
SEMIGROUP_THRESHOLD = 5e-4
BOUNDARY_LAYER = 0.05


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    error: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.threshold)


def _outside_layer(grid: LogGrid, layer: float = BOUNDARY_LAYER) -> np.ndarray:
    return grid.u_values >= layer * grid.length


def _raw(samples) -> np.ndarray:
    return samples.raw()


def power_log_error(alpha: float, beta_exp: float, grid: LogGrid) -> float:
    """Max relative error of ``I^alpha (log(t/a))^(beta_exp-1)`` outside the boundary layer.

    The input is stored with its smallest admissible weight.
    """
    f = power_log_samples(grid, beta_exp - 1.0)
    approx = _raw(hadamard_integral(f, alpha))
    mask = _outside_layer(grid)
    exact = np.array([power_log_integral_closed_form(alpha, beta_exp, grid.a, t)
                      for t in grid.t_values[mask]])
    return float(np.max(np.abs(approx[mask] - exact) / np.abs(exact)))


def semigroup_error(alpha: float, beta: float, grid: LogGrid, exponent: float = 0.5,
                    layer: float = BOUNDARY_LAYER) -> float:
    """Max relative gap between ``I^alpha I^beta f`` and ``I^(alpha+beta) f`` for ``f = (log(t/a))^exponent``."""
    f = power_log_samples(grid, exponent)
    nested = _raw(hadamard_integral(hadamard_integral(f, beta), alpha))
    direct = _raw(hadamard_integral(f, alpha + beta))
    mask = _outside_layer(grid, layer) & (grid.u_values > 0)
    return float(np.max(np.abs(nested[mask] - direct[mask]) / np.abs(direct[mask])))


def run_identity_checks(alpha: float, nodes: int, a: float, b: float, alpha2: float = 0.7) -> list[IdentityCheck]:
    grid = LogGrid(a, b, nodes)
    rows = [IdentityCheck(f"power-log beta_exp={be:g}", power_log_error(alpha, be, grid), POWER_THRESHOLD)
            for be in POWER_EXPONENTS]
    rows.append(IdentityCheck(f"semigroup I^{alpha:g} I^{alpha2:g} vs I^{alpha + alpha2:g}",
                              semigroup_error(alpha, alpha2, grid), SEMIGROUP_THRESHOLD))
    return rows
