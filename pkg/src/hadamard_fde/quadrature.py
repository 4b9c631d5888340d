r"""Product-trapezoidal weights for the Riemann-Liouville form of the Hadamard integral.

In the log variable the integral of order ``alpha`` reads

.. math:: (I^\alpha f)(u) = \frac{1}{\Gamma(\alpha)} \int_0^u (u - s)^{\alpha - 1} f(s)\, ds.

Samples are stored weighted, ``w(s) = s**mu * f(s)``.  The rule interpolates
``w`` piecewise linearly and integrates ``(u - s)**(alpha - 1) * s**(-mu)``
times each hat function exactly, so the weights only depend on
``(node_count, h, alpha, mu)`` and are cached.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as sc

from .errors import DomainError

__all__ = ["apply_integral", "integral_limit_at_a", "product_weights"]

_SERIES_TERMS = 40


def _binomial_tail(p: float, x: np.ndarray, start: int, step: int, sign: float) -> np.ndarray:
    # sum_{m >= start, m = start (mod step)} C(p, m) * (sign*x)**m
    coeffs = [1.0]
    for m in range(_SERIES_TERMS * step + start):
        coeffs.append(coeffs[-1] * (p - m) / (m + 1))
    total = np.zeros_like(x)
    for m in range(start, len(coeffs), step):
        total += coeffs[m] * (sign * x) ** m
    return total


def _second_difference(p: float, x: np.ndarray) -> np.ndarray:
    """(1 + x)**p - 2 + (1 - x)**p for 0 < x <= 1, without cancellation."""
    with np.errstate(divide="ignore"):
        out = np.expm1(p * np.log1p(x)) + np.expm1(p * np.log1p(-x))
    small = p * x <= 0.5
    if np.any(small):
        out[small] = 2.0 * _binomial_tail(p, x[small], 2, 2, 1.0)
    return out


def _left_end(p: float, x: np.ndarray) -> np.ndarray:
    """(1 - x)**p - 1 + p*x for 0 < x <= 1."""
    with np.errstate(divide="ignore"):
        out = np.expm1(p * np.log1p(-x)) + p * x
    small = p * x <= 0.5
    if np.any(small):
        out[small] = _binomial_tail(p, x[small], 2, 1, -1.0)
    return out


def _weights_unweighted(n: int, h: float, alpha: float) -> np.ndarray:
    p = alpha + 1.0
    log_scale = alpha * math.log(h) - math.lgamma(alpha + 2.0)
    k = np.arange(1, n, dtype=float)
    # Toeplitz part: column j < i, j >= 1 depends on k = i - j only.
    toeplitz = np.exp(log_scale + p * np.log(k)) * _second_difference(p, 1.0 / k)
    first = np.exp(log_scale + p * np.log(k)) * _left_end(p, 1.0 / k)
    W = np.zeros((n, n))
    i, j = np.tril_indices(n, -1)
    W[i, j] = toeplitz[i - j - 1]
    W[1:, 0] = first
    idx = np.arange(1, n)
    W[idx, idx] = math.exp(log_scale)
    return W


def _beta_increments(a: float, b: float, z: np.ndarray) -> np.ndarray:
    # Regularised incomplete beta differences over [z_j, z_{j+1}]; the
    # complementary form keeps accuracy where z is close to 1.
    lo = sc.betainc(a, b, z)
    hi = sc.betainc(b, a, 1.0 - z)
    return np.where(z[1:] <= 0.5, np.diff(lo), hi[:-1] - hi[1:])


def _weights_weighted(n: int, h: float, alpha: float, mu: float) -> np.ndarray:
    a0, a1 = 1.0 - mu, 2.0 - mu
    g0 = math.exp(math.lgamma(a0) - math.lgamma(a0 + alpha))
    g1 = math.exp(math.lgamma(a1) - math.lgamma(a1 + alpha))
    W = np.zeros((n, n))
    for i in range(1, n):
        z = np.arange(i + 1, dtype=float) / i
        m0 = g0 * _beta_increments(a0, alpha, z)
        m1 = g1 * _beta_increments(a1, alpha, z)
        j = np.arange(i, dtype=float)
        left = (j + 1.0) * m0 - i * m1
        right = i * m1 - j * m0
        row = np.zeros(i + 1)
        row[:-1] += left
        row[1:] += right
        W[i, : i + 1] = math.exp((alpha - mu) * math.log(i * h)) * row
    return W


@lru_cache(maxsize=16)
def _cached_weights(n: int, h: float, alpha: float, mu: float) -> np.ndarray:
    W = _weights_unweighted(n, h, alpha) if mu == 0.0 else _weights_weighted(n, h, alpha, mu)
    W.setflags(write=False)
    return W


def product_weights(n: int, h: float, alpha: float, mu: float) -> np.ndarray:
    """Lower-triangular matrix ``W`` with ``(I^alpha f)(u_i) ~ sum_j W[i, j] w_j``.

    Row 0 is zero; the value at ``u = 0`` is a limit handled by
    :func:`integral_limit_at_a`.
    """
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"integration order must be positive, got {alpha!r}")
    if not (0.0 <= mu < 1.0):
        raise DomainError(f"weight exponent must lie in [0, 1), got {mu!r}")
    return _cached_weights(int(n), float(h), float(alpha), float(mu))


def integral_limit_at_a(w0: float, alpha: float, mu_in: float, mu_out: float) -> float:
    """Limit of ``u**mu_out * I^alpha[s**-mu_in * w](u)`` as ``u -> 0``."""
    exponent = alpha - mu_in + mu_out
    if exponent < -1e-12:
        raise DomainError(
            f"output weight {mu_out} too small: the integral behaves like u^{alpha - mu_in:.6g} at a"
        )
    if abs(exponent) <= 1e-12:
        return w0 * math.exp(math.lgamma(1.0 - mu_in) - math.lgamma(1.0 - mu_in + alpha))
    return 0.0


def apply_integral(values: np.ndarray, u: np.ndarray, alpha: float, mu_in: float,
                   mu_out: float) -> np.ndarray:
    """Weighted samples (exponent ``mu_out``) of ``I^alpha`` of weighted samples ``values``."""
    n = u.shape[0]
    h = float(u[-1] / (n - 1))
    W = product_weights(n, h, alpha, mu_in)
    out = W @ values
    if mu_out != 0.0:
        out[1:] *= u[1:] ** mu_out
    out[0] = integral_limit_at_a(float(values[0]), alpha, mu_in, mu_out)
    return out
