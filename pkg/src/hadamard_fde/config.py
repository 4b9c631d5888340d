"""JSON problem specifications."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Any

from .errors import ExpressionSyntaxError, SpecParseError, ValidationError
from .expression import parse_rhs_expression
from .grid import FractionalOrder, LogGrid
from .rhs import ConstantRhs, ExpressionRhs, LinearRhs, SaturatingRhs, estimate_lipschitz
from .solver import CauchyProblem

__all__ = ["ProblemSpec", "parse_problem_spec", "serialize_problem_spec"]

REQUIRED = ("alpha", "beta", "n", "a", "b", "initial_values", "rhs")
DEFAULTS = {"lipschitz": None, "grid_nodes": 1025, "tol": 1e-10, "omega_target": 0.5, "max_iter": 200}
RHS_KINDS = {"linear": ("lambda",), "saturating": ("lambda",), "constant": ("value",), "zero": ()}


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    beta: float
    n: int
    a: float
    b: float
    initial_values: tuple
    rhs: Any  # expression text or a normalised catalog dict
    lipschitz: float | None = None
    grid_nodes: int = 1025
    tol: float = 1e-10
    omega_target: float = 0.5
    max_iter: int = 200

    @property
    def order(self) -> FractionalOrder:
        return FractionalOrder.of(self.alpha, self.beta, self.n)

    def rhs_function(self):
        if isinstance(self.rhs, str):
            return ExpressionRhs(self.rhs)
        kind = self.rhs["kind"]
        if kind == "linear":
            return LinearRhs(self.rhs["lambda"])
        if kind == "saturating":
            return SaturatingRhs(self.rhs["lambda"])
        if kind == "constant":
            return ConstantRhs(self.rhs["value"])
        return ConstantRhs(0.0)

    def build(self) -> tuple[CauchyProblem, LogGrid]:
        """Concrete problem and grid; estimates L heuristically if neither declared nor cataloged."""
        phi = self.rhs_function()
        L = self.lipschitz
        if L is None:
            L = phi.lipschitz
        if L is None:
            scale = 10.0 * max(1.0, max(abs(v) for v in self.initial_values))
            L = estimate_lipschitz(phi, self.a, self.b, (-scale, scale))
            if L == 0.0:
                L = 1.0
        problem = CauchyProblem(self.order, self.a, self.b, self.initial_values, phi, L)
        return problem, LogGrid(self.a, self.b, self.grid_nodes)

    def with_changes(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} is not allowed")


def _number(doc: dict, key: str, path: str | None = None) -> float:
    path = path or key
    value = doc[key] if isinstance(doc, dict) else doc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(path, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(path, "must be finite")
    return value


def _integer(doc: dict, key: str) -> int:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ValidationError(key, f"expected an integer, got {value!r}")
    return int(value)


def _parse_rhs(value) -> Any:
    if isinstance(value, str):
        try:
            parse_rhs_expression(value)
        except ExpressionSyntaxError as exc:
            raise ValidationError("rhs", str(exc)) from None
        return value
    if not isinstance(value, dict):
        raise ValidationError("rhs", "expected an expression string or a catalog object")
    kind = value.get("kind")
    if kind not in RHS_KINDS:
        raise ValidationError("rhs.kind", f"unknown kind {kind!r}; expected one of {sorted(RHS_KINDS)}")
    allowed = {"kind", *RHS_KINDS[kind]}
    extra = sorted(set(value) - allowed)
    if extra:
        raise ValidationError(f"rhs.{extra[0]}", f"unexpected key for kind {kind!r}")
    out = {"kind": kind}
    for key in RHS_KINDS[kind]:
        if key not in value:
            raise ValidationError(f"rhs.{key}", "missing")
        out[key] = _number(value, key, f"rhs.{key}")
    return out


def _validate(doc) -> ProblemSpec:
    if not isinstance(doc, dict):
        raise ValidationError("$", "top level must be a JSON object")
    unknown = sorted(set(doc) - set(REQUIRED) - set(DEFAULTS))
    if unknown:
        raise ValidationError(unknown[0], "unknown key")
    for key in REQUIRED:
        if key not in doc:
            raise ValidationError(key, "missing")
    n = _integer(doc, "n")
    if not 1 <= n <= 3:
        raise ValidationError("n", f"1<=n<=3 violated (n={n})")
    alpha = _number(doc, "alpha")
    if not n - 1 < alpha < n:
        raise ValidationError("alpha", f"n-1<alpha<n violated (n={n}, alpha={alpha!r})")
    beta = _number(doc, "beta")
    if not 0.0 <= beta <= 1.0:
        raise ValidationError("beta", f"0<=beta<=1 violated (beta={beta!r})")
    a = _number(doc, "a")
    if not a > 0:
        raise ValidationError("a", f"a>0 violated (a={a!r})")
    b = _number(doc, "b")
    if not b > a:
        raise ValidationError("b", f"b>a violated (a={a!r}, b={b!r})")
    values = doc["initial_values"]
    if not isinstance(values, list):
        raise ValidationError("initial_values", "expected an array")
    if len(values) != n:
        raise ValidationError("initial_values", f"len(initial_values)=n violated ({len(values)} != {n})")
    initial = tuple(_number(values[i], None, f"initial_values[{i}]") for i in range(n))
    rhs = _parse_rhs(doc["rhs"])
    opts = dict(DEFAULTS)
    opts.update({k: doc[k] for k in DEFAULTS if k in doc})
    lipschitz = opts["lipschitz"]
    if lipschitz is not None:
        lipschitz = _number(opts, "lipschitz")
        if not lipschitz > 0:
            raise ValidationError("lipschitz", f"lipschitz>0 violated (lipschitz={lipschitz!r})")
    grid_nodes = _integer(opts, "grid_nodes")
    if grid_nodes < n + 3:
        raise ValidationError("grid_nodes", f"grid_nodes>=n+3 violated (grid_nodes={grid_nodes})")
    tol = _number(opts, "tol")
    if not tol > 0:
        raise ValidationError("tol", f"tol>0 violated (tol={tol!r})")
    omega = _number(opts, "omega_target")
    if not 0 < omega < 1:
        raise ValidationError("omega_target", f"0<omega_target<1 violated (omega_target={omega!r})")
    max_iter = _integer(opts, "max_iter")
    if max_iter < 1:
        raise ValidationError("max_iter", f"max_iter>=1 violated (max_iter={max_iter})")
    return ProblemSpec(alpha, beta, n, a, b, initial, rhs, lipschitz, grid_nodes, tol, omega, max_iter)


def parse_problem_spec(text: str | bytes) -> ProblemSpec:
    """Parse and validate a JSON problem specification, applying defaults."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SpecParseError(f"invalid UTF-8: {exc.reason}", exc.start) from None
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"malformed JSON: {exc.msg}", _byte_offset(text, exc.pos)) from None
    except ValueError as exc:
        raise SpecParseError(f"malformed JSON: {exc}", 0) from None
    return _validate(doc)


def spec_to_dict(spec: ProblemSpec) -> dict:
    doc = {
        "alpha": spec.alpha,
        "beta": spec.beta,
        "n": spec.n,
        "a": spec.a,
        "b": spec.b,
        "initial_values": list(spec.initial_values),
        "rhs": spec.rhs if isinstance(spec.rhs, str) else dict(spec.rhs),
        "grid_nodes": spec.grid_nodes,
        "tol": spec.tol,
        "omega_target": spec.omega_target,
        "max_iter": spec.max_iter,
    }
    if spec.lipschitz is not None:
        doc["lipschitz"] = spec.lipschitz
    return doc


def serialize_problem_spec(spec: ProblemSpec) -> str:
    """JSON text; floats use the shortest round-trip representation, so re-parsing is exact."""
    return json.dumps(spec_to_dict(spec), indent=2)

