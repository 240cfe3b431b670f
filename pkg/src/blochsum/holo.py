"""Expression trees for vector-valued holomorphic functions on the disc.

Nodes are immutable; structural equality is the canonical-form equality.
Evaluation, first and second derivatives broadcast over numpy arrays of
points and always return vectors of shape (..., dim), dim = 1 for scalar
expressions.  Truncated power series carry an assured-validity radius
r < 1; everything else is valid on the full closed disc.

Serialization is a plain JSON tree: {"kind": ..., ...} with complex
numbers as [re, im] pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Union

import numpy as np

from .disc import DiscPoint, MobiusMap, _check_interior
from .errors import OutOfValidity, ParseError

__all__ = [
    "HoloExpr",
    "Monomial",
    "Extremal",
    "Sum",
    "Scale",
    "PrecomposeMobius",
    "Tensor",
    "Taylor",
    "vec_norm",
    "expr_to_dict",
    "expr_from_dict",
    "normalize_origin",
]

_Z = Union[complex, np.ndarray, DiscPoint]


def _as_points(z: _Z) -> np.ndarray:
    if isinstance(z, DiscPoint):
        z = z.value
    return np.asarray(z, dtype=complex)


def vec_norm(vec: np.ndarray, flavor: str = "euclidean", axis: int = -1):
    """Norm of target-space vectors along the last axis."""
    if flavor == "euclidean":
        return np.linalg.norm(vec, axis=axis)
    if flavor == "sup":
        return np.max(np.abs(vec), axis=axis)
    if flavor == "sum":
        return np.sum(np.abs(vec), axis=axis)
    raise ValueError(f"unknown norm flavor {flavor!r}")


def _vecify(values: np.ndarray) -> np.ndarray:
    # scalar expression values -> shape (..., 1)
    return values[..., np.newaxis]


class HoloExpr:
    """Base node.  Subclasses implement value/derivative/second_derivative,
    dim, validity_radius and sup bounds for the first three derivatives."""

    def value(self, z: _Z) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, z: _Z) -> np.ndarray:
        raise NotImplementedError

    def second_derivative(self, z: _Z) -> np.ndarray:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def validity_radius(self) -> float:
        return 1.0

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        """Certified upper bounds for sup of ||f'||, ||f''||, ||f'''|| on the
        closed validity disc."""
        raise NotImplementedError

    def _check_validity(self, z: np.ndarray) -> None:
        r = self.validity_radius()
        if r < 1.0 and np.any(np.abs(z) > r + 1e-12):
            raise OutOfValidity(
                f"evaluation outside the assured-validity disc of radius {r}"
            )

    def __add__(self, other: "HoloExpr") -> "HoloExpr":
        return Sum((self, other))

    def __mul__(self, scalar: complex) -> "HoloExpr":
        return Scale(complex(scalar), self)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Monomial(HoloExpr):
    """z^k, scalar-valued."""

    degree: int

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")

    def value(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        return _vecify(z**self.degree)

    def derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        k = self.degree
        if k == 0:
            return _vecify(np.zeros_like(z))
        return _vecify(k * z ** (k - 1))

    def second_derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        k = self.degree
        if k < 2:
            return _vecify(np.zeros_like(z))
        return _vecify(k * (k - 1) * z ** (k - 2))

    @property
    def dim(self) -> int:
        return 1

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        k = self.degree
        return (float(k), float(k * (k - 1)), float(k * (k - 1) * (k - 2)))


@dataclass(frozen=True)
class Extremal(HoloExpr):
    """f_a(z) = (1 - |a|^2) z / (1 - conj(a) z): the unit-seminorm function
    whose invariant derivative peaks at a with value exactly 1."""

    center: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _check_interior(self.center, "center"))

    def value(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        a = self.center
        return _vecify((1.0 - abs(a) ** 2) * z / (1.0 - np.conj(a) * z))

    def derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        a = self.center
        return _vecify((1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2)

    def second_derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        a = self.center
        return _vecify(2.0 * np.conj(a) * (1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 3)

    @property
    def dim(self) -> int:
        return 1

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        a = abs(self.center)
        base = 1.0 - a**2
        return tuple(
            factorial(n) * a ** (n - 1 if n > 1 else 0) * base / (1.0 - a) ** (n + 1)
            for n in (1, 2, 3)
        )


@dataclass(frozen=True)
class Sum(HoloExpr):
    terms: tuple[HoloExpr, ...]

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("empty sum")
        dims = {t.dim for t in terms}
        if len(dims) > 1:
            from .errors import DimensionMismatch

            raise DimensionMismatch(f"summands have dimensions {sorted(dims)}")
        object.__setattr__(self, "terms", terms)

    def value(self, z: _Z) -> np.ndarray:
        return sum(t.value(z) for t in self.terms)

    def derivative(self, z: _Z) -> np.ndarray:
        return sum(t.derivative(z) for t in self.terms)

    def second_derivative(self, z: _Z) -> np.ndarray:
        return sum(t.second_derivative(z) for t in self.terms)

    @property
    def dim(self) -> int:
        return self.terms[0].dim

    def validity_radius(self) -> float:
        return min(t.validity_radius() for t in self.terms)

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        bounds = [t.derivative_sup_bounds(flavor) for t in self.terms]
        return tuple(sum(b[i] for b in bounds) for i in range(3))


@dataclass(frozen=True)
class Scale(HoloExpr):
    factor: complex
    operand: HoloExpr

    def __post_init__(self) -> None:
        object.__setattr__(self, "factor", complex(self.factor))

    def value(self, z: _Z) -> np.ndarray:
        return self.factor * self.operand.value(z)

    def derivative(self, z: _Z) -> np.ndarray:
        return self.factor * self.operand.derivative(z)

    def second_derivative(self, z: _Z) -> np.ndarray:
        return self.factor * self.operand.second_derivative(z)

    @property
    def dim(self) -> int:
        return self.operand.dim

    def validity_radius(self) -> float:
        return self.operand.validity_radius()

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        m = abs(self.factor)
        return tuple(m * b for b in self.operand.derivative_sup_bounds(flavor))


@dataclass(frozen=True)
class PrecomposeMobius(HoloExpr):
    """f o phi for a disc automorphism phi."""

    mobius: MobiusMap
    operand: HoloExpr

    def value(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        self._check_validity(z)
        return self.operand.value(self.mobius(z))

    def derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        self._check_validity(z)
        w = self.mobius(z)
        dphi = np.asarray(self.mobius.derivative(z), dtype=complex)
        return self.operand.derivative(w) * dphi[..., np.newaxis]

    def second_derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        self._check_validity(z)
        w = self.mobius(z)
        dphi = np.asarray(self.mobius.derivative(z), dtype=complex)[..., np.newaxis]
        d2phi = np.asarray(self.mobius.second_derivative(z), dtype=complex)[..., np.newaxis]
        return self.operand.second_derivative(w) * dphi**2 + self.operand.derivative(w) * d2phi

    @property
    def dim(self) -> int:
        return self.operand.dim

    def validity_radius(self) -> float:
        r = self.operand.validity_radius()
        if r >= 1.0:
            return 1.0
        # largest rho with |phi| <= r on the closed rho-disc:
        # sup |phi| = (|a| + rho) / (1 + |a| rho), solve for rho.
        a = abs(self.mobius.center)
        if r <= a:
            return 0.0
        return (r - a) / (1.0 - a * r)

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        m1, m2, m3 = self.operand.derivative_sup_bounds(flavor)
        rho = self.validity_radius()
        b1, b2, b3 = (self.mobius.derivative_sup(n, rho) for n in (1, 2, 3))
        # Faà di Bruno for orders 1..3 of f o phi
        return (
            m1 * b1,
            m2 * b1**2 + m1 * b2,
            m3 * b1**3 + 3.0 * m2 * b1 * b2 + m1 * b3,
        )


@dataclass(frozen=True)
class Tensor(HoloExpr):
    """g(z) x for a scalar expression g and a fixed target vector x."""

    operand: HoloExpr
    vector: tuple[complex, ...]

    def __post_init__(self) -> None:
        if self.operand.dim != 1:
            from .errors import DimensionMismatch

            raise DimensionMismatch("tensor operand must be scalar-valued")
        vec = tuple(complex(v) for v in self.vector)
        if not vec:
            raise ValueError("empty tensor vector")
        object.__setattr__(self, "vector", vec)

    def _lift(self, scalar_vals: np.ndarray) -> np.ndarray:
        x = np.asarray(self.vector, dtype=complex)
        return scalar_vals[..., 0:1] * x

    def value(self, z: _Z) -> np.ndarray:
        return self._lift(self.operand.value(z))

    def derivative(self, z: _Z) -> np.ndarray:
        return self._lift(self.operand.derivative(z))

    def second_derivative(self, z: _Z) -> np.ndarray:
        return self._lift(self.operand.second_derivative(z))

    @property
    def dim(self) -> int:
        return len(self.vector)

    def validity_radius(self) -> float:
        return self.operand.validity_radius()

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        scale = float(vec_norm(np.asarray(self.vector, dtype=complex), flavor))
        return tuple(scale * b for b in self.operand.derivative_sup_bounds(flavor))


@dataclass(frozen=True)
class Taylor(HoloExpr):
    """Truncated power series sum c_k z^k with an assured-validity radius r < 1."""

    coefficients: tuple[complex, ...]
    radius: float

    def __post_init__(self) -> None:
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("empty coefficient list")
        if not 0.0 < self.radius < 1.0:
            raise ValueError("assured-validity radius must lie in (0, 1)")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "radius", float(self.radius))

    def _horner(self, z: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(z)
        for c in coeffs[::-1]:
            acc = acc * z + c
        return acc

    def value(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        self._check_validity(z)
        return _vecify(self._horner(z, np.asarray(self.coefficients)))

    def derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        self._check_validity(z)
        c = np.asarray(self.coefficients)
        dc = c[1:] * np.arange(1, len(c))
        if dc.size == 0:
            return _vecify(np.zeros_like(z))
        return _vecify(self._horner(z, dc))

    def second_derivative(self, z: _Z) -> np.ndarray:
        z = _as_points(z)
        self._check_validity(z)
        c = np.asarray(self.coefficients)
        d2c = c[2:] * np.arange(2, len(c)) * np.arange(1, len(c) - 1)
        if d2c.size == 0:
            return _vecify(np.zeros_like(z))
        return _vecify(self._horner(z, d2c))

    @property
    def dim(self) -> int:
        return 1

    def validity_radius(self) -> float:
        return self.radius

    def derivative_sup_bounds(self, flavor: str = "euclidean") -> tuple[float, float, float]:
        r = self.radius
        a = np.abs(np.asarray(self.coefficients))
        k = np.arange(len(a), dtype=float)
        b1 = float(np.sum(k * a * r ** np.maximum(k - 1, 0)))
        b2 = float(np.sum(k * (k - 1) * a * r ** np.maximum(k - 2, 0)))
        b3 = float(np.sum(k * (k - 1) * (k - 2) * a * r ** np.maximum(k - 3, 0)))
        return (b1, b2, b3)


def normalize_origin(expr: HoloExpr) -> HoloExpr:
    """Subtract the value at 0, yielding an expression vanishing at the origin.

    The constant is folded in as a degree-0 correction so the result stays a
    plain expression tree; the derivative is untouched."""
    v0 = expr.value(0.0j)
    if np.max(np.abs(v0)) == 0.0:
        return expr
    if expr.dim == 1:
        shift: HoloExpr = Scale(-complex(v0[0]), Monomial(0))
    else:
        shift = Tensor(Monomial(0), tuple(-complex(c) for c in v0))
    return Sum((expr, shift))


# ---------------------------------------------------------------------------
# JSON serialization

def _c2j(c: complex) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def _j2c(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise ParseError(f"expected a complex number as [re, im], got {obj!r}")


def expr_to_dict(expr: HoloExpr) -> dict:
    if isinstance(expr, Monomial):
        return {"kind": "monomial", "degree": expr.degree}
    if isinstance(expr, Extremal):
        return {"kind": "extremal", "center": _c2j(expr.center)}
    if isinstance(expr, Sum):
        return {"kind": "sum", "terms": [expr_to_dict(t) for t in expr.terms]}
    if isinstance(expr, Scale):
        return {"kind": "scale", "factor": _c2j(expr.factor), "operand": expr_to_dict(expr.operand)}
    if isinstance(expr, PrecomposeMobius):
        return {
            "kind": "precompose_mobius",
            "rotation": _c2j(expr.mobius.rotation),
            "center": _c2j(expr.mobius.center),
            "operand": expr_to_dict(expr.operand),
        }
    if isinstance(expr, Tensor):
        return {
            "kind": "tensor",
            "vector": [_c2j(v) for v in expr.vector],
            "operand": expr_to_dict(expr.operand),
        }
    if isinstance(expr, Taylor):
        return {
            "kind": "taylor",
            "coefficients": [_c2j(c) for c in expr.coefficients],
            "radius": expr.radius,
        }
    raise ParseError(f"unserializable expression node {type(expr).__name__}")


def expr_from_dict(obj: dict) -> HoloExpr:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("expression node must be an object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "monomial":
            return Monomial(int(obj["degree"]))
        if kind == "extremal":
            return Extremal(_j2c(obj["center"]))
        if kind == "sum":
            return Sum(tuple(expr_from_dict(t) for t in obj["terms"]))
        if kind == "scale":
            return Scale(_j2c(obj["factor"]), expr_from_dict(obj["operand"]))
        if kind == "precompose_mobius":
            return PrecomposeMobius(
                MobiusMap(_j2c(obj["rotation"]), _j2c(obj["center"])),
                expr_from_dict(obj["operand"]),
            )
        if kind == "tensor":
            return Tensor(expr_from_dict(obj["operand"]), tuple(_j2c(v) for v in obj["vector"]))
        if kind == "taylor":
            return Taylor(tuple(_j2c(c) for c in obj["coefficients"]), float(obj["radius"]))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed {kind!r} node: {exc}") from exc
    raise ParseError(f"unknown expression kind {kind!r}")
