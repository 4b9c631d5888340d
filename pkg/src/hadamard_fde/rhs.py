"""Right-hand sides phi(t, x): a small catalog plus expression-backed functions."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .expression import RhsExpression, parse_rhs_expression

log = logging.getLogger(__name__)

__all__ = [
    "ConstantRhs",
    "ExpressionRhs",
    "LinearRhs",
    "SaturatingRhs",
    "ZeroRhs",
    "estimate_lipschitz",
]


@dataclass(frozen=True)
class LinearRhs:
    """phi(t, x) = lam * x."""

    lam: float = 1.0

    def __call__(self, t, x):
        return self.lam * np.asarray(x, dtype=float)

    @property
    def lipschitz(self) -> float:
        return abs(self.lam)

    def to_json(self) -> dict:
        return {"kind": "linear", "lambda": self.lam}


@dataclass(frozen=True)
class SaturatingRhs:
    """phi(t, x) = lam * x / (1 + x^2); Lipschitz constant |lam|."""

    lam: float = 1.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return self.lam * x / (1.0 + x * x)

    @property
    def lipschitz(self) -> float:
        return abs(self.lam)

    def to_json(self) -> dict:
        return {"kind": "saturating", "lambda": self.lam}


@dataclass(frozen=True)
class ConstantRhs:
    """phi(t, x) = value.  Any positive L is valid; 1 is reported."""

    value: float = 0.0

    def __call__(self, t, x):
        shape = np.broadcast(np.asarray(t), np.asarray(x)).shape
        return np.full(shape, float(self.value)) if shape else float(self.value)

    @property
    def lipschitz(self) -> float:
        return 1.0

    def to_json(self) -> dict:
        return {"kind": "constant", "value": self.value}


def ZeroRhs() -> ConstantRhs:
    return ConstantRhs(0.0)


class ExpressionRhs:
    """phi given by an expression in ``t`` and ``x``; no Lipschitz constant is known."""

    lipschitz = None

    def __init__(self, expr: RhsExpression | str):
        self.expr = parse_rhs_expression(expr) if isinstance(expr, str) else expr

    def __call__(self, t, x):
        return self.expr.evaluate(t, x)

    def __repr__(self) -> str:
        return f"ExpressionRhs({self.expr.text!r})"

    def to_json(self) -> str:
        return self.expr.text


def estimate_lipschitz(phi, a: float, b: float, x_box: tuple[float, float],
                       samples: int = 64, safety: float = 2.0) -> float:
    """Heuristic Lipschitz constant of ``phi`` in ``x`` over ``[a, b] x x_box``.

    Takes the largest difference quotient between neighbouring ``x`` samples
    and multiplies by ``safety``.  This is a guess, not a bound: a declared
    constant should be preferred whenever one is known.
    """
    t = np.geomspace(a, b, samples)
    x = np.linspace(x_box[0], x_box[1], 4 * samples + 1)
    T, X = np.meshgrid(t, x, indexing="ij")
    vals = np.asarray(phi(T, X), dtype=float)
    quotients = np.abs(np.diff(vals, axis=1)) / np.diff(x)[None, :]
    estimate = safety * float(np.max(quotients))
    log.warning("using heuristic Lipschitz estimate L=%.6g (sampled, safety factor %g)", estimate, safety)
    return estimate
