"""Shared oracles.  Everything here is computed independently of the package
(arbitrary precision via mpmath, or brute-force quadrature)."""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def ml_reference(alpha: float, gamma: float, z: float, dps: int = 40) -> float:
    """Mittag-Leffler series summed at ``dps`` digits until terms are negligible."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        total = mpmath.mpf(0)
        i = 0
        while True:
            term = z ** i * mpmath.rgamma(i * mpmath.mpf(alpha) + gamma)
            total += term
            if i > 10 and abs(term) < mpmath.mpf(10) ** (-dps + 5) * max(1, abs(total)) \
                    and i * alpha + gamma > 1 + abs(float(z)) ** (1 / alpha):
                return float(total)
            i += 1


def linear_solution_weighted(alpha: float, beta: float, lam: float, x_a: float, u) -> np.ndarray:
    """``u**(1-gamma) x(u)`` for ``phi = lam*x``, n = 1."""
    gamma = alpha + beta * (1 - alpha)
    return np.array([x_a * ml_reference(alpha, gamma, lam * v ** alpha) for v in np.atleast_1d(u)])


def brute_force_gronwall(u_vals, psi_vals, alpha: float, grid_u, iterations: int = 400,
                         gauss: int = 48) -> np.ndarray:
    """Fixed point of ``v = u + psi(t) Gamma(alpha) I^alpha v`` by direct iteration.

    The integral over ``[0, u_i]`` is done with the substitution
    ``r = (u_i - s)**alpha / alpha`` which removes the kernel singularity,
    Gauss-Legendre nodes in ``r`` and linear interpolation of ``v``.
    """
    x, w = np.polynomial.legendre.leggauss(gauss)
    grid_u = np.asarray(grid_u, float)
    v = np.array(u_vals, float)
    for _ in range(iterations):
        new = np.empty_like(v)
        new[0] = u_vals[0]
        for i in range(1, len(grid_u)):
            ui = grid_u[i]
            rmax = ui ** alpha / alpha
            r = 0.5 * rmax * (x + 1)
            s = ui - (alpha * r) ** (1 / alpha)
            integral = 0.5 * rmax * np.sum(w * np.interp(s, grid_u, v))
            new[i] = u_vals[i] + psi_vals[i] * integral  # Gamma(alpha) cancels 1/Gamma(alpha)
        if np.max(np.abs(new - v)) < 1e-14 * max(1.0, np.max(np.abs(new))):
            return new
        v = new
    return v


def acceptance_line(criterion: int, passed: bool, detail: str) -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def e_grid_1025():
    from hadamard_fde import LogGrid
    return LogGrid(1.0, math.e, 1025)
