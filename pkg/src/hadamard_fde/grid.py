"""Orders, log-uniform grids and weighted sample storage."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError

__all__ = ["FractionalOrder", "LogGrid", "WeightedSamples", "weighted_norm"]


@dataclass(frozen=True)
class FractionalOrder:
    r"""Order data ``(alpha, beta, n, gamma)`` with :math:`\gamma = \alpha + \beta(n - \alpha)`.

    Build it with :meth:`of`, which derives ``n`` and ``gamma_val``.  The
    integer endpoint ``alpha = n`` is accepted as the classical case
    (``gamma = n`` for every ``beta``).
    """

    alpha: float
    beta: float
    n: int
    gamma_val: float

    def __post_init__(self):
        a, b, n = self.alpha, self.beta, self.n
        if int(n) != n or n < 1:
            raise DomainError(f"n must be a positive integer, got {n!r}")
        if not (math.isfinite(a) and n - 1 < a <= n):
            raise DomainError(f"n-1 < alpha <= n violated (n={n}, alpha={a!r})")
        if not (math.isfinite(b) and 0.0 <= b <= 1.0):
            raise DomainError(f"0 <= beta <= 1 violated (beta={b!r})")
        if self.gamma_val != a + b * (n - a):
            raise DomainError("gamma_val must equal alpha + beta*(n - alpha)")

    @classmethod
    def of(cls, alpha: float, beta: float, n: int | None = None) -> "FractionalOrder":
        alpha = float(alpha)
        beta = float(beta)
        if n is None:
            if not math.isfinite(alpha) or alpha <= 0:
                raise DomainError(f"alpha must be positive, got {alpha!r}")
            n = max(1, math.ceil(alpha))
        return cls(alpha, beta, int(n), alpha + beta * (int(n) - alpha))

    @property
    def mu(self) -> float:
        """Weight exponent n - gamma of the solution space."""
        return self.n - self.gamma_val


@dataclass(frozen=True, eq=False)
class LogGrid:
    """Grid on [a, b] that is uniform in u = log(t/a)."""

    a: float
    b: float
    node_count: int
    u_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a, b, n = float(self.a), float(self.b), self.node_count
        if not (math.isfinite(a) and math.isfinite(b) and 0 < a < b):
            raise DomainError(f"need 0 < a < b, got a={self.a!r}, b={self.b!r}")
        if int(n) != n or n < 2:
            raise ShapeError(f"node_count must be an integer >= 2, got {n!r}")
        u = np.linspace(0.0, math.log(b / a), int(n))
        u.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "node_count", int(n))
        object.__setattr__(self, "u_values", u)

    @property
    def h(self) -> float:
        return float(self.u_values[-1] / (self.node_count - 1))

    @property
    def length(self) -> float:
        return float(self.u_values[-1])

    @property
    def t_values(self) -> np.ndarray:
        return self.a * np.exp(self.u_values)

    def key(self) -> tuple:
        return (self.a, self.b, self.node_count)

    def __eq__(self, other):
        return isinstance(other, LogGrid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True, eq=False)
class WeightedSamples:
    r"""Samples ``values[i] = u_i**mu * f(t_i)``; ``values[0]`` holds the limit at ``t = a``."""

    grid: LogGrid
    mu: float
    values: np.ndarray

    def __post_init__(self):
        mu = float(self.mu)
        if not (0.0 <= mu < 1.0):
            raise DomainError(f"weight exponent must lie in [0, 1), got {self.mu!r}")
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.shape[0] != self.grid.node_count:
            raise ShapeError(
                f"expected {self.grid.node_count} samples, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("weighted samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: LogGrid, mu: float, weighted) -> "WeightedSamples":
        """Sample a weighted function ``weighted(u)`` given in the log variable."""
        return cls(grid, mu, np.asarray(weighted(grid.u_values), dtype=float))

    def raw(self) -> np.ndarray:
        """De-weighted values; entry 0 is ``inf``/limit-dependent, so it is NaN when mu > 0."""
        out = np.array(self.values, dtype=float)
        if self.mu > 0:
            u = self.grid.u_values
            out[1:] = out[1:] / u[1:] ** self.mu
            out[0] = np.nan
        return out

    def reweighted(self, mu: float) -> "WeightedSamples":
        """Same function stored with a larger weight exponent (limit at ``a`` becomes 0)."""
        if mu < self.mu:
            raise DomainError("can only increase the weight exponent without knowing the limit")
        if mu == self.mu:
            return self
        u = self.grid.u_values
        vals = np.zeros_like(self.values)
        vals[1:] = self.values[1:] * u[1:] ** (mu - self.mu)
        return WeightedSamples(self.grid, mu, vals)


def weighted_norm(f: WeightedSamples) -> float:
    """Sup-norm of the weighted representation."""
    if f.values.size == 0:
        raise ShapeError("weighted_norm of an empty sample set")
    return float(np.max(np.abs(f.values)))
