"""Points of the open unit disc and its rotation-involution automorphisms.

Every automorphism of the disc factors as a rotation composed with the
self-inverse swap  z -> (a - z) / (1 - conj(a) z)  exchanging 0 and a.
That pair (rotation, center) is the stored normal form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDisc

__all__ = ["DiscPoint", "MobiusMap", "sample_disc"]

_INTERIOR_TOL = 1e-14


def _check_interior(value: complex, what: str = "point") -> complex:
    value = complex(value)
    if abs(value) >= 1.0 - _INTERIOR_TOL:
        raise OutOfDisc(f"{what} {value!r} is not in the open unit disc")
    return value


@dataclass(frozen=True)
class DiscPoint:
    """A point of the open unit disc. Construction validates |z| < 1."""

    value: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _check_interior(self.value))

    @property
    def modulus(self) -> float:
        return abs(self.value)

    def conformal_weight(self) -> float:
        """1 - |z|^2, the weight in the invariant derivative."""
        return 1.0 - self.modulus**2

    def __complex__(self) -> complex:
        return self.value


@dataclass(frozen=True)
class MobiusMap:
    """Disc automorphism  z -> rotation * (center - z) / (1 - conj(center) z)."""

    rotation: complex = 1.0 + 0.0j
    center: complex = 0.0j

    def __post_init__(self) -> None:
        rot = complex(self.rotation)
        if abs(abs(rot) - 1.0) > 1e-12:
            raise ValueError(f"rotation {rot!r} must be unimodular")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "center", _check_interior(self.center, "center"))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.rotation * (self.center - z) / (1.0 - np.conj(self.center) * z)
        return complex(out) if out.ndim == 0 else out

    def apply_point(self, point: DiscPoint) -> DiscPoint:
        return DiscPoint(self(point.value))

    def derivative(self, z):
        a = self.center
        z = np.asarray(z, dtype=complex)
        out = self.rotation * (abs(a) ** 2 - 1.0) / (1.0 - np.conj(a) * z) ** 2
        return complex(out) if out.ndim == 0 else out

    def second_derivative(self, z):
        a = self.center
        z = np.asarray(z, dtype=complex)
        out = 2.0 * np.conj(a) * self.rotation * (abs(a) ** 2 - 1.0) / (
            1.0 - np.conj(a) * z
        ) ** 3
        return complex(out) if out.ndim == 0 else out

    def inverse(self) -> "MobiusMap":
        # (rot, a)^-1 = (conj(rot), rot * a): both swap maps are involutions.
        return MobiusMap(np.conj(self.rotation), self.rotation * self.center)

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """Normal form of self o other, recovered from the image of 0 and the
        rotation at the pulled-back center."""
        center = other.inverse()(self.inverse()(0.0j))
        # self(other(z)) = rot * (c - z)/(1 - conj(c) z); read rot off at z = 0.
        value_at_zero = self(other(0.0j))
        if abs(center) < _INTERIOR_TOL:
            rotation = -self.derivative(other(0.0j)) * other.derivative(0.0j)
        else:
            rotation = value_at_zero / center
        rotation /= abs(rotation)
        return MobiusMap(rotation, center)

    def derivative_sup(self, order: int, radius: float = 1.0) -> float:
        """Sup of |d^n phi| over the closed disc of the given radius."""
        a = abs(self.center)
        if order == 0:
            return 1.0
        fact = float(np.prod(np.arange(1, order + 1))) if order > 1 else 1.0
        return fact * a ** (order - 1) * (1.0 - a**2) / (1.0 - a * radius) ** (order + 1)


def sample_disc(n: int, mode: str = "polar_grid", seed: int = 0, r_cap: float = 0.95):
    """Deterministic point clouds in the disc.

    ``polar_grid``: concentric rings with phase offsets, radii below r_cap.
    ``pseudo_hyperbolic``: seeded low-discrepancy draw, uniform in the
    hyperbolic metric up to r_cap (density ~ 1/(1-r^2)^2 truncated).
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0.0 < r_cap < 1.0:
        raise ValueError("r_cap must lie in (0, 1)")
    if mode == "polar_grid":
        pts: list[complex] = [0.0j]  # the degenerate grid is the origin
        rings = max(1, int(np.ceil(np.sqrt(max(n - 1, 0) / 4.0))))
        for i in range(rings):
            if len(pts) == n:
                break
            r = r_cap * (i + 1) / (rings + 0.5)
            per_ring = max(4, int(np.ceil((n - 1) / rings)))
            for k in range(per_ring):
                theta = 2.0 * np.pi * (k / per_ring + 0.1 * (i + 1))
                pts.append(r * np.exp(1j * theta))
                if len(pts) == n:
                    break
        return [DiscPoint(p) for p in pts[:n]]
    if mode == "pseudo_hyperbolic":
        rng = np.random.default_rng(seed)
        u = rng.random(n)
        # invert the truncated hyperbolic area law rho(r) dr ~ r/(1-r^2)^2
        cap = r_cap**2 / (1.0 - r_cap**2)
        r = np.sqrt(u * cap / (1.0 + u * cap))
        theta = 2.0 * np.pi * rng.random(n)
        return [DiscPoint(rr * np.exp(1j * tt)) for rr, tt in zip(r, theta)]
    raise ValueError(f"unknown sampling mode {mode!r}")
