"""Hadamard integral, Hadamard derivative and Hilfer-Hadamard derivative on log grids."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ShapeError
from .grid import FractionalOrder, LogGrid, WeightedSamples
from .quadrature import apply_integral
from .special import log_gamma, reciprocal_gamma

__all__ = [
    "default_integral_weight",
    "hadamard_derivative",
    "hadamard_integral",
    "hilfer_hadamard_derivative",
    "power_log_integral_closed_form",
    "power_log_samples",
]


def default_integral_weight(alpha: float, mu: float) -> float:
    """Smallest weight that keeps ``I^alpha`` of a ``C_mu`` function bounded at ``a``."""
    return 0.0 if alpha >= mu else mu - alpha


def _check_order(alpha: float, what: str) -> float:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 0):
        raise DomainError(f"{what} order must be positive, got {alpha!r}")
    return alpha


def hadamard_integral(f: WeightedSamples, alpha: float, mu_out: float | None = None) -> WeightedSamples:
    r"""Hadamard fractional integral of order ``alpha`` by product-trapezoidal quadrature.

    .. math:: (I^\alpha f)(t) = \frac{1}{\Gamma(\alpha)} \int_a^t
              \Big(\log\frac{t}{\tau}\Big)^{\alpha-1} f(\tau)\,\frac{d\tau}{\tau}

    The result is stored with weight ``mu_out``; by default the smallest one
    that keeps it bounded (``0`` if ``alpha >= f.mu``, else ``f.mu - alpha``).
    """
    alpha = _check_order(alpha, "integration")
    if mu_out is None:
        mu_out = default_integral_weight(alpha, f.mu)
    u = f.grid.u_values
    vals = apply_integral(np.asarray(f.values), u, alpha, f.mu, float(mu_out))
    return WeightedSamples(f.grid, mu_out, vals)


def _integral_or_identity(f: WeightedSamples, order: float) -> WeightedSamples:
    return f if order == 0.0 else hadamard_integral(f, order)


def _raw_tail(g: WeightedSamples) -> tuple[np.ndarray, int]:
    """Raw values usable for differencing and the first usable node."""
    if g.mu == 0.0:
        return np.array(g.values), 0
    u = g.grid.u_values
    return g.values[1:] / u[1:] ** g.mu, 1


def _delta_power(raw: np.ndarray, h: float, n: int) -> np.ndarray:
    # delta = t d/dt = d/du; second-order central differences, one-sided at the ends
    out = raw
    for _ in range(n):
        out = np.gradient(out, h, edge_order=2)
    return out


def _weighted_output(grid: LogGrid, raw: np.ndarray, start: int, mu_out: float) -> np.ndarray:
    u = grid.u_values
    out = np.empty(grid.node_count)
    out[start:] = raw * (u[start:] ** mu_out if mu_out else 1.0)
    if start == 0:
        if mu_out:
            out[0] = 0.0
    else:
        # no sample at a: extrapolate the weighted values quadratically
        out[0] = 3.0 * out[1] - 3.0 * out[2] + out[3]
    return out


def _derivative_raw(f: WeightedSamples, alpha: float) -> tuple[np.ndarray, int]:
    n = math.floor(alpha) + 1
    grid = f.grid
    if grid.node_count < n + 2:
        raise ShapeError(f"{grid.node_count} nodes cannot support {n}-fold differencing (need >= {n + 2})")
    g = _integral_or_identity(f, n - alpha)
    raw, start = _raw_tail(g)
    if raw.size < max(3, n + 2):
        raise ShapeError("grid too coarse to difference away from the singular node")
    return _delta_power(raw, grid.h, n), start


def _split_leading(f: WeightedSamples) -> tuple[WeightedSamples, float]:
    """Remove ``w0 * u**(-mu)`` (``w0`` = weighted limit at ``a``) from ``f``.

    The leading power is the part finite differences resolve worst near ``a``;
    its derivatives are known exactly.
    """
    w0 = float(f.values[0])
    if w0 == 0.0:
        return f, 0.0
    return WeightedSamples(f.grid, f.mu, f.values - w0), w0


def _power_derivative_coeff(q: float, alpha: float, n: int, gamma_val: float) -> float:
    """``c`` in ``D^{alpha,beta} u**q = c * u**(q - alpha)`` (zero on the kernel)."""
    e = q + n - gamma_val
    if abs(e - round(e)) < 1e-12 and 0 <= round(e) <= n - 1:
        return 0.0
    return math.exp(log_gamma(q + 1.0)) * reciprocal_gamma(q + 1.0 - alpha)


def _add_power(grid: LogGrid, out: np.ndarray, coeff: float, exponent: float, mu_out: float) -> np.ndarray:
    if coeff == 0.0:
        return out
    u = grid.u_values
    total = exponent + mu_out
    term = np.empty_like(out)
    term[1:] = coeff * u[1:] ** total
    if total > 0:
        term[0] = 0.0
    elif total == 0:
        term[0] = coeff
    else:
        # not representable at a; keep the same extrapolation as the numeric part
        term[0] = 3.0 * term[1] - 3.0 * term[2] + term[3]
    return out + term


def hadamard_derivative(f: WeightedSamples, alpha: float, mu_out: float | None = None) -> WeightedSamples:
    """Hadamard derivative ``delta^n I^{n - alpha} f`` with ``n = floor(alpha) + 1``.

    ``mu_out`` defaults to the weight of ``f``.
    """
    alpha = _check_order(alpha, "differentiation")
    if mu_out is None:
        mu_out = f.mu
    rest, w0 = _split_leading(f)
    raw, start = _derivative_raw(rest, alpha)
    out = _weighted_output(f.grid, raw, start, mu_out)
    n = math.floor(alpha) + 1
    coeff = w0 * _power_derivative_coeff(-f.mu, alpha, n, alpha)
    return WeightedSamples(f.grid, mu_out, _add_power(f.grid, out, coeff, -f.mu - alpha, mu_out))


def _initial_derivatives(g: WeightedSamples, count: int) -> list[float]:
    """``(delta^k g)(a)`` for ``k < count`` from one-sided differences."""
    if g.mu != 0.0:
        raise DomainError("I^{n-gamma} f is unbounded at a; the Hilfer derivative is undefined for this weight")
    vals = np.array(g.values)
    out = [float(vals[0])]
    for _ in range(1, count):
        vals = np.gradient(vals, g.grid.h, edge_order=2)
        out.append(float(vals[0]))
    return out


def hilfer_hadamard_derivative(f: WeightedSamples, ord: FractionalOrder,
                               mu_out: float | None = None) -> WeightedSamples:
    r"""Hilfer-Hadamard derivative :math:`I^{\beta(n-\alpha)} \delta^n I^{(n-\alpha)(1-\beta)} f`.

    The outer integral is moved past ``delta^n``:

    .. math:: I^p \delta^n g = \delta^n I^p g
              - \sum_{k<n} (\delta^k g)(a) \frac{u^{p-n+k}}{\Gamma(p-n+k+1)},

    with ``g = I^{n-\gamma} f``.  Since ``I^p g = I^{n-\alpha} f`` the first term
    is the Hadamard derivative of order ``alpha``, so the whole operator costs
    one quadrature and ``n`` finite differences, with no integration of
    differencing noise.
    """
    alpha, beta, n = ord.alpha, ord.beta, ord.n
    if mu_out is None:
        mu_out = f.mu
    rest, w0 = _split_leading(f)
    raw, start = _derivative_raw(rest, alpha)
    p = beta * (n - alpha)
    if p > 0.0:
        g = _integral_or_identity(rest, n - ord.gamma_val)
        coeffs = _initial_derivatives(g, n)
        u = f.grid.u_values[start:]
        with np.errstate(divide="ignore"):
            for k, c in enumerate(coeffs):
                e = p - n + k
                if c != 0.0:
                    term = c * reciprocal_gamma(e + 1.0) * u ** e
                    raw = raw - term
        if start == 0 and not np.isfinite(raw[0]):
            raw = raw[1:]
            start = 1
    out = _weighted_output(f.grid, raw, start, mu_out)
    coeff = w0 * _power_derivative_coeff(-f.mu, alpha, n, ord.gamma_val)
    return WeightedSamples(f.grid, mu_out, _add_power(f.grid, out, coeff, -f.mu - alpha, mu_out))


def power_log_integral_closed_form(alpha: float, beta_exp: float, a: float, t: float) -> float:
    r""":math:`\frac{\Gamma(\beta)}{\Gamma(\alpha+\beta)} (\log(t/a))^{\alpha+\beta-1}`,
    the Hadamard integral of ``(log(tau/a))**(beta - 1)``."""
    alpha = _check_order(alpha, "integration")
    if not (beta_exp > 0 and math.isfinite(beta_exp)):
        raise DomainError(f"power exponent parameter must be positive, got {beta_exp!r}")
    if not (0 < a < t):
        raise DomainError(f"need t > a > 0, got a={a!r}, t={t!r}")
    return math.exp(log_gamma(beta_exp) - log_gamma(alpha + beta_exp)) * math.log(t / a) ** (alpha + beta_exp - 1.0)


def power_log_samples(grid: LogGrid, exponent: float, mu: float | None = None) -> WeightedSamples:
    """Samples of ``(log(t/a))**exponent``.

    The default weight is the smallest admissible one, ``max(0, -exponent)``.
    """
    if mu is None:
        mu = max(0.0, -exponent)
    shifted = exponent + mu
    if shifted < 0:
        raise DomainError(f"weight {mu} does not tame (log(t/a))^{exponent}")
    u = grid.u_values
    vals = np.empty_like(u)
    vals[1:] = u[1:] ** shifted
    vals[0] = 1.0 if shifted == 0 else 0.0
    return WeightedSamples(grid, mu, vals)
