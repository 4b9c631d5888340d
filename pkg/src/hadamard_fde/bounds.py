r"""A priori bounds: Gronwall series, order/initial-value dependence envelopes, epsilon bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, ShapeError
from .grid import FractionalOrder, LogGrid, WeightedSamples
from .operators import default_integral_weight
from .quadrature import apply_integral
from .solver import CauchyProblem
from .special import MLParams, log_gamma, mittag_leffler

__all__ = [
    "GronwallInput",
    "PerturbationSpec",
    "dependence_envelope_samples",
    "epsilon_ml_bound",
    "gronwall_series_bound",
    "hadamard_dependence_envelope",
    "hilfer_dependence_envelope",
    "perturbation_forcing",
]

DEFAULT_ENVELOPE_NODES = 1025


@dataclass(frozen=True, eq=False)
class GronwallInput:
    """Data of the Gronwall bound on a grid.

    ``u_vals`` may be stored weighted with exponent ``mu`` (so singular
    forcing terms at ``a`` are allowed); ``psi_vals`` are plain samples.
    """

    grid: LogGrid
    u_vals: np.ndarray
    psi_vals: np.ndarray
    alpha: float
    series_cap: int = 200
    series_tol: float = 1e-12
    mu: float = 0.0

    def __post_init__(self):
        n = self.grid.node_count
        u = np.asarray(self.u_vals, dtype=float)
        psi = np.broadcast_to(np.asarray(self.psi_vals, dtype=float), (n,)).copy()
        if u.shape != (n,):
            raise ShapeError(f"u_vals must have {n} samples, got shape {u.shape}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        if np.any(u < 0) or np.any(psi < 0) or not np.all(np.isfinite(u)) or not np.all(np.isfinite(psi)):
            raise DomainError("u and psi samples must be finite and nonnegative")
        if np.any(np.diff(psi) < -1e-14 * max(1.0, float(np.max(psi)))):
            raise DomainError("psi samples must be nondecreasing")
        if not (0.0 <= self.mu < 1.0):
            raise DomainError(f"weight exponent must lie in [0, 1), got {self.mu!r}")
        object.__setattr__(self, "u_vals", u)
        object.__setattr__(self, "psi_vals", psi)


def _series_terms(scale: float, horizon: float, alpha: float, cap: int, tol: float) -> int:
    """Number of terms K such that the K-th kernel coefficient is below ``tol`` times the total."""
    if scale == 0.0 or horizon == 0.0:
        return 0
    log_base = math.log(scale) + alpha * math.log(horizon)
    total = 1.0
    for k in range(1, cap + 1):
        coeff = math.exp(k * log_base - math.lgamma(k * alpha + 1.0))
        total += coeff
        if coeff < tol * total:
            return k
    raise ConvergenceError(
        f"Gronwall series needs more than {cap} terms (coefficient {coeff:.3e})",
        last_update=coeff, context={"scale": scale, "alpha": alpha},
    )


def gronwall_series_bound(g: GronwallInput) -> WeightedSamples:
    r"""Evaluate :math:`u + \sum_{k\ge1} (\psi(t)\Gamma(\alpha))^k I^{k\alpha} u` on the grid.

    Every power is one product-quadrature application of order ``m*alpha``
    to a source function.  The source is ``u`` itself when it is bounded;
    a singular ``u`` is first smoothed by single ``I^alpha`` steps (exact
    semigroup) until its weight drops to zero, after which all remaining
    powers come straight from that source with the cheap unweighted rule.
    The result keeps the weight of ``u``.
    """
    grid = g.grid
    u = grid.u_values
    factor = g.psi_vals * math.gamma(g.alpha)
    terms = _series_terms(float(np.max(factor)), grid.length, g.alpha, g.series_cap, g.series_tol)
    out = np.array(g.u_vals, dtype=float)
    source, source_mu, level = np.asarray(g.u_vals, dtype=float), g.mu, 0
    for k in range(1, terms + 1):
        order = (k - level) * g.alpha
        if source_mu > 0.0:
            mu_next = default_integral_weight(order, source_mu)
            term = apply_integral(source, u, order, source_mu, mu_next)
            source, source_mu, level = term, mu_next, k
            term = _raise_weight(term, u, mu_next, g.mu)
        else:
            term = apply_integral(source, u, order, 0.0, g.mu)
        out += factor ** k * term
    return WeightedSamples(grid, g.mu, out)


def _raise_weight(values: np.ndarray, u: np.ndarray, mu_from: float, mu_to: float) -> np.ndarray:
    if mu_to == mu_from:
        return values
    out = np.zeros_like(values)
    out[1:] = values[1:] * u[1:] ** (mu_to - mu_from)
    return out


@dataclass(frozen=True)
class PerturbationSpec:
    """Perturbation of a base problem.

    ``delta`` lowers the order, ``epsilon`` shifts the initial value
    (``x~_a = x_a + epsilon``), ``phi_sup`` is the sup of ``|phi(t, x(t))|``
    along the base solution.  ``horizon`` is the right end ``h`` of the
    validity interval; it defaults to ``base.b``.
    """

    delta: float
    epsilon: float
    base: CauchyProblem
    phi_sup: float
    horizon: float | None = None

    def __post_init__(self):
        if self.base.ord.n != 1:
            raise DomainError("dependence bounds are stated for 0 < alpha < 1 (n = 1)")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise DomainError(f"delta must be >= 0, got {self.delta!r}")
        if not (0 < self.base.ord.alpha - self.delta <= 1):
            raise DomainError("0 < alpha - delta <= 1 violated")
        if not (self.phi_sup >= 0 and math.isfinite(self.phi_sup)):
            raise DomainError(f"phi_sup must be finite and >= 0, got {self.phi_sup!r}")
        if not math.isfinite(self.epsilon):
            raise DomainError("epsilon must be finite")
        h = self.base.b if self.horizon is None else float(self.horizon)
        if not (self.base.a < h):
            raise DomainError("horizon must lie to the right of a")
        object.__setattr__(self, "horizon", h)

    @property
    def x_a(self) -> float:
        return self.base.initial_values[0]

    @property
    def x_tilde_a(self) -> float:
        return self.x_a + self.epsilon


def _power_terms_weighted(terms: list[tuple[float, float]], u: np.ndarray, mu: float) -> np.ndarray:
    """``u**mu * sum c u**e`` with the exact limit at u = 0."""
    out = np.zeros_like(u)
    limit = 0.0
    for c, e in terms:
        if c == 0.0:
            continue
        out[1:] += c * u[1:] ** (e + mu)
        if abs(e + mu) <= 1e-14:
            limit += c
    out[0] = limit
    return out


def perturbation_forcing(s: PerturbationSpec, beta: float, u: np.ndarray) -> tuple[np.ndarray, float]:
    """Weighted samples of the forcing term F (``beta = 0`` gives H) and their weight.

    Three absolute differences: initial terms, the two ways of normalising
    the order-``alpha - delta`` power, and the order change itself.
    """
    alpha = s.base.ord.alpha
    ap = alpha - s.delta
    gamma = alpha + beta * (1.0 - alpha)
    gamma_t = gamma + s.delta * (beta - 1.0)
    mu = max(0.0, 1.0 - gamma, 1.0 - gamma_t)
    first = [(s.x_tilde_a / math.gamma(gamma_t), gamma_t - 1.0),
             (-s.x_a / math.gamma(gamma), gamma - 1.0)]
    c_mid = 1.0 / (ap * math.gamma(alpha))
    second = [(1.0 / math.gamma(ap + 1.0), ap), (-c_mid, ap)]
    third = [(c_mid, ap), (-1.0 / math.gamma(alpha + 1.0), alpha)]
    total = np.abs(_power_terms_weighted(first, u, mu))
    total += s.phi_sup * np.abs(_power_terms_weighted(second, u, mu))
    total += s.phi_sup * np.abs(_power_terms_weighted(third, u, mu))
    return total, mu


def dependence_envelope_samples(s: PerturbationSpec, grid: LogGrid, beta: float = 0.0) -> WeightedSamples:
    """Envelope ``F + sum_k (L Gamma(alpha-delta)/Gamma(alpha))^k I^{k(alpha-delta)} F`` on ``grid``."""
    if not (0.0 <= beta <= 1.0):
        raise DomainError(f"0 <= beta <= 1 violated (beta={beta!r})")
    if grid.a != s.base.a or grid.b > s.horizon * (1 + 1e-15):
        raise DomainError("envelope grid must start at a and end at or before the horizon")
    alpha = s.base.ord.alpha
    ap = alpha - s.delta
    forcing, mu = perturbation_forcing(s, beta, grid.u_values)
    psi = np.full(grid.node_count, s.base.lipschitz / math.gamma(alpha))
    return gronwall_series_bound(GronwallInput(grid, forcing, psi, ap, mu=mu))


def _envelope_at(s: PerturbationSpec, beta: float, t: float, nodes: int) -> float:
    t = float(t)
    if not (s.base.a < t <= s.horizon * (1 + 1e-15)):
        raise DomainError(f"t={t!r} lies outside (a, h] = ({s.base.a}, {s.horizon}]")
    env = dependence_envelope_samples(s, LogGrid(s.base.a, t, nodes), beta)
    return float(env.values[-1] / math.log(t / s.base.a) ** env.mu)


def hadamard_dependence_envelope(s: PerturbationSpec, t: float, nodes: int = DEFAULT_ENVELOPE_NODES) -> float:
    """Bound on ``|x~(t) - x(t)|`` when the Hadamard order drops from alpha to alpha - delta."""
    return _envelope_at(s, 0.0, t, nodes)


def hilfer_dependence_envelope(s: PerturbationSpec, ord: FractionalOrder, t: float,
                               nodes: int = DEFAULT_ENVELOPE_NODES) -> float:
    """Same as :func:`hadamard_dependence_envelope` for the Hilfer-Hadamard order ``ord``."""
    if ord.n != 1:
        raise DomainError("dependence bounds are stated for n = 1")
    if abs(ord.alpha - s.base.ord.alpha) > 1e-15:
        raise DomainError("order does not match the base problem")
    return _envelope_at(s, ord.beta, t, nodes)


def epsilon_ml_bound(ord: FractionalOrder, L: float, epsilon: float, a: float, t: float) -> float:
    """``|eps| (log(t/a))^(gamma-1) E_{alpha,gamma}(L (log(t/a))^alpha)``."""
    if ord.n != 1:
        raise DomainError("the epsilon bound is stated for n = 1")
    if not (0 < a < t):
        raise DomainError(f"need t > a > 0, got a={a!r}, t={t!r}")
    u = math.log(t / a)
    if epsilon == 0.0:
        return 0.0
    ml = mittag_leffler(MLParams(ord.alpha, ord.gamma_val), L * u ** ord.alpha)
    return abs(epsilon) * u ** (ord.gamma_val - 1.0) * ml
