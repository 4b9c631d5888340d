"""Gamma machinery and the two-parameter Mittag-Leffler function."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special as sc

from .errors import ConvergenceError, DomainError

__all__ = [
    "MLParams",
    "gamma_ratio",
    "log_gamma",
    "mittag_leffler",
    "reciprocal_gamma",
]


_ROOT_WINDOW = 0.2
# (-1)^k zeta(k) / k for k >= 2: Taylor coefficients of log Gamma(1 + z) + euler_gamma*z
_LGAMMA_TAYLOR = [(-1) ** k * float(sc.zeta(k)) / k for k in range(2, 40)]


def _log_gamma_one_plus(z: float) -> float:
    # |z| <= 0.2; the series stays relative-accurate as log Gamma(1 + z) -> 0
    total = 0.0
    for coeff in reversed(_LGAMMA_TAYLOR):
        total = (total + coeff) * z
    return (total - np.euler_gamma) * z


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for real x > 0.

    Near the zeros at x = 1 and x = 2 a Taylor series in the (exactly
    representable) offset keeps the relative error small; elsewhere
    ``math.lgamma`` is used.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma needs a finite positive argument, got {x!r}")
    if abs(x - 1.0) <= _ROOT_WINDOW:
        return _log_gamma_one_plus(x - 1.0)
    if abs(x - 2.0) <= _ROOT_WINDOW:
        z = x - 2.0
        return _log_gamma_one_plus(z) + math.log1p(z)
    return math.lgamma(x)


def gamma_ratio(num: float, den: float) -> float:
    """Gamma(num) / Gamma(den) through log differences (both arguments > 0)."""
    return math.exp(log_gamma(num) - log_gamma(den))


def reciprocal_gamma(x):
    """1/Gamma(x), zero at the poles; vectorised."""
    return sc.rgamma(x)


@dataclass(frozen=True)
class MLParams:
    """Parameters of E_{alpha, gamma_param}.

    ``max_abs_arg`` bounds the admissible argument: only the truncated series
    is implemented, so far-field arguments are rejected instead of returning
    a slowly convergent or overflowing sum.
    """

    alpha: float
    gamma_param: float
    series_tol: float = 1e-16
    max_terms: int = 5000
    max_abs_arg: float = 50.0

    def __post_init__(self):
        for name in ("alpha", "gamma_param", "series_tol", "max_abs_arg"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"MLParams.{name} must be finite and > 0, got {value!r}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"MLParams.max_terms must be an integer >= 1, got {self.max_terms!r}")


def _ml_positive(p: MLParams, y: float) -> float:
    log_value = _log_ml_positive(p, y)
    if log_value > 709.78:
        raise DomainError(f"Mittag-Leffler value exp({log_value:.1f}) overflows double precision")
    return math.exp(log_value)


def _log_ml_positive(p: MLParams, y: float) -> float:
    # All terms share the sign of y**i; for y >= 0 nothing cancels, so plain
    # double precision in log space is accurate to a few ulps.
    if y == 0.0:
        return -log_gamma(p.gamma_param)
    log_y = math.log(y)
    total = 0.0
    term = 0.0
    # Track the sum scaled by exp(-shift) so huge partial sums cannot overflow
    # before the tolerance test; the scale is undone once at the end.
    shift = None
    for i in range(p.max_terms):
        log_term = i * log_y - math.lgamma(i * p.alpha + p.gamma_param)
        if shift is None:
            shift = log_term
        if log_term - shift > 700.0:
            total *= math.exp(shift - log_term)
            shift = log_term
        term = math.exp(log_term - shift)
        total += term
        if i > 0 and term < p.series_tol * total and i * p.alpha + p.gamma_param > 1.0 + y ** (1.0 / p.alpha):
            return math.log(total) + shift
    raise ConvergenceError(
        f"Mittag-Leffler series did not reach tolerance within {p.max_terms} terms",
        last_update=math.exp(min(math.log(term) + shift, 709.0)) if term > 0 else 0.0,
        context={"alpha": p.alpha, "gamma": p.gamma_param, "y": y},
    )


def _ml_alternating(p: MLParams, y: float) -> float:
    # The largest term is about E(|y|) while the sum can be tiny, so every
    # term needs log10(E(|y|)) extra digits to survive the cancellation.
    log_peak = _log_ml_positive(p, -y)
    extra = max(0, int(log_peak / math.log(10.0))) + 20
    with mpmath.workdps(17 + extra):
        yy = mpmath.mpf(y)
        a = mpmath.mpf(p.alpha)
        g = mpmath.mpf(p.gamma_param)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for i in range(p.max_terms):
            term = power * mpmath.rgamma(i * a + g)
            total += term
            if i > 0 and abs(term) < p.series_tol * abs(total) * mpmath.mpf(10) ** -extra \
                    and i * p.alpha + p.gamma_param > 1.0 + abs(y) ** (1.0 / p.alpha):
                return float(total)
            power *= yy
    raise ConvergenceError(
        f"Mittag-Leffler series did not reach tolerance within {p.max_terms} terms",
        last_update=float(abs(term)),
        context={"alpha": p.alpha, "gamma": p.gamma_param, "y": y},
    )


def mittag_leffler(p: MLParams, y: float) -> float:
    r"""Two-parameter Mittag-Leffler function.

    .. math:: E_{\alpha,\gamma}(y) = \sum_{i\ge 0} \frac{y^i}{\Gamma(i\alpha + \gamma)}

    Nonnegative arguments are summed in double precision; negative ones in
    extended precision because of cancellation between alternating terms.
    """
    y = float(y)
    if not math.isfinite(y) or abs(y) > p.max_abs_arg:
        raise DomainError(f"|y| must not exceed {p.max_abs_arg}, got {y!r}")
    if y >= 0.0:
        return _ml_positive(p, y)
    return _ml_alternating(p, y)


def mittag_leffler_array(p: MLParams, y) -> np.ndarray:
    """Elementwise :func:`mittag_leffler`."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    for idx, value in np.ndenumerate(y):
        out[idx] = mittag_leffler(p, value)
    return out
