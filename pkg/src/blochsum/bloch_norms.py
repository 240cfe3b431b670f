"""Certified brackets for the Bloch seminorm and certified test families.

The seminorm sup (1-|z|^2) ||f'(z)|| is bracketed by adaptive refinement of
square cells covering the disc.  Each cell gets a rigorous upper bound from
a second-order Taylor expansion of f' at the cell representative together
with sup bounds on f''' from the expression structure; evaluations at cell
representatives push the lower bound up.  Cells whose upper bound cannot
beat the current lower bound are discarded; the rest are quartered.  Both
sides use fixed reduction orders, so results are evaluation-order
independent and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disc import DiscPoint, MobiusMap
from .errors import CertificationFailure, ParseError
from .holo import (
    Extremal,
    HoloExpr,
    Monomial,
    PrecomposeMobius,
    Scale,
    Sum,
    Taylor,
    Tensor,
    expr_from_dict,
    expr_to_dict,
    normalize_origin,
    vec_norm,
)

__all__ = [
    "CertBracket",
    "extremal",
    "bloch_seminorm_bracket",
    "TestFamily",
    "make_family",
    "default_family",
    "family_mobius_closure",
    "family_precompose",
    "family_to_dict",
    "family_from_dict",
]


@dataclass(frozen=True)
class CertBracket:
    """Two-sided enclosure of a seminorm value.

    lower is attained by the stored witness point; upper is a rigorous bound
    (math.inf when the expression is only trusted on a sub-disc)."""

    lower: float
    upper: float
    witness: complex
    lower_method: str
    upper_method: str
    evaluations: int

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-12:
            raise CertificationFailure(
                f"inverted bracket [{self.lower}, {self.upper}]"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper if math.isfinite(self.upper) else "inf",
            "witness": [self.witness.real, self.witness.imag],
            "lower_method": self.lower_method,
            "upper_method": self.upper_method,
            "evaluations": self.evaluations,
        }


def extremal(a) -> Extremal:
    """The unit-seminorm function whose invariant derivative attains 1 at a."""
    if isinstance(a, DiscPoint):
        a = a.value
    return Extremal(a)


def _peel_homogeneous(f: HoloExpr, flavor: str) -> tuple[float, HoloExpr]:
    """Strip top-level scale/tensor factors; returns (modulus, core) with
    seminorm(f) = modulus * seminorm(core).  Keeps brackets exactly
    homogeneous in the stripped factors."""
    scale = 1.0
    while True:
        if isinstance(f, Scale):
            scale *= abs(f.factor)
            f = f.operand
        elif isinstance(f, Tensor):
            scale *= float(vec_norm(np.asarray(f.vector, dtype=complex), flavor))
            f = f.operand
        else:
            return scale, f


def _hint_points(f: HoloExpr) -> list[complex]:
    """Candidate maximizers: the origin plus extremal centers pulled back
    through enclosing automorphisms."""
    if isinstance(f, Extremal):
        return [0.0j, f.center]
    if isinstance(f, (Sum,)):
        out = [0.0j]
        for t in f.terms:
            out.extend(_hint_points(t))
        return out
    if isinstance(f, (Scale, Tensor)):
        return _hint_points(f.operand)
    if isinstance(f, PrecomposeMobius):
        inv = f.mobius.inverse()
        return [inv(w) for w in _hint_points(f.operand)]
    return [0.0j]


def _weighted(f: HoloExpr, zs: np.ndarray, flavor: str) -> np.ndarray:
    return (1.0 - np.abs(zs) ** 2) * vec_norm(f.derivative(zs), flavor)


def bloch_seminorm_bracket(
    f: HoloExpr,
    resolution: int = 64,
    target_rel_width: float = 5e-4,
    max_cells: int = 2_000_000,
    norm: str = "euclidean",
) -> CertBracket:
    """Certified enclosure of sup (1-|z|^2) ||f'(z)|| over the disc.

    resolution fixes the initial uniform cell grid on [-1,1]^2; refinement
    then proceeds until the relative width reaches target_rel_width or the
    cell budget is spent.  Expressions with an assured-validity radius
    below 1 get a finite lower bound only (upper = inf).
    """
    scale, core = _peel_homogeneous(f, norm)
    if scale == 0.0:
        return CertBracket(0.0, 0.0, 0.0j, "exact", "exact", 0)

    cap = core.validity_radius()
    evaluations = 0

    # lower-bound seeds: hints plus polar rings
    hints = np.asarray(_hint_points(core), dtype=complex)
    rings = np.concatenate(
        [
            (r * np.exp(2j * np.pi * np.arange(resolution) / resolution))
            for r in (0.0, 0.25, 0.5, 0.7, 0.85, 0.93)
        ]
    )
    seeds = np.concatenate([hints, rings])
    seeds = seeds[np.abs(seeds) <= min(cap, 1.0) - 1e-12]
    vals = _weighted(core, seeds, norm)
    evaluations += seeds.size
    idx = int(np.argmax(vals))
    lower = float(vals[idx])
    witness = complex(seeds[idx])

    if cap < 1.0:
        return CertBracket(
            scale * lower,
            math.inf,
            witness,
            "grid-max",
            "uncertified: validity radius below 1",
            evaluations,
        )

    _, _, m3 = core.derivative_sup_bounds(norm)

    # initial uniform cells on [-1,1]^2
    k = max(8, resolution)
    h = 1.0 / k  # half-width
    axis = -1.0 + h + 2.0 * h * np.arange(k)
    cx, cy = np.meshgrid(axis, axis)
    centers = (cx + 1j * cy).ravel()
    halfw = np.full(centers.size, h)
    total_cells = centers.size

    upper = math.inf
    for _ in range(64):
        rho = halfw * math.sqrt(2.0)
        dist = np.abs(centers)
        inside = dist - rho < 1.0  # cell meets the closed disc
        centers, halfw, rho, dist = (
            centers[inside],
            halfw[inside],
            rho[inside],
            dist[inside],
        )
        if centers.size == 0:
            upper = lower
            break
        # representative: cell center projected into the closed disc
        reps = np.where(dist <= 1.0, centers, centers / np.maximum(dist, 1e-30))
        delta = rho + np.maximum(dist - 1.0, 0.0)  # max |z - rep| over cell
        d1v = core.derivative(reps)
        d2v = core.second_derivative(reps)
        d1 = vec_norm(d1v, norm)
        d2 = vec_norm(d2v, norm)
        evaluations += 2 * reps.size
        w_max = 1.0 - np.maximum(dist - rho, 0.0) ** 2  # sup of 1-|z|^2 on cell
        cell_upper = w_max * (d1 + delta * d2 + 0.5 * delta**2 * m3)
        if norm == "euclidean" or core.dim == 1:
            # Second-order bound W(z) <= W(rep) + delta|grad W| + delta^2/2 H:
            # grad of (1-|z|^2)||f'|| from the Wirtinger derivative, and a
            # cell Hessian bound using ||D^2 ||f'|| || <= ||f'''|| + 2||f''||^2/||f'||.
            w_rep = 1.0 - np.abs(reps) ** 2
            u_safe = np.maximum(d1, 1e-300)
            cross = np.sum(d1v * np.conj(d2v), axis=-1)
            grad = 2.0 * np.abs(-reps * d1 + w_rep * cross / (2.0 * u_safe))
            u_up = d1 + delta * d2 + 0.5 * delta**2 * m3
            d2_up = d2 + delta * m3
            u_low = d1 - delta * d2 - 0.5 * delta**2 * m3
            with np.errstate(divide="ignore", invalid="ignore"):
                hess = 2.0 * u_up + 4.0 * d2_up + w_max * (m3 + 2.0 * d2_up**2 / u_low)
            smooth = w_rep * d1 + delta * grad + 0.5 * delta**2 * hess
            ok = u_low > 1e-12
            cell_upper = np.where(ok, np.minimum(cell_upper, smooth), cell_upper)

        # lower-bound update from interior representatives
        strict = np.abs(reps) < 1.0 - 1e-12
        if np.any(strict):
            w_here = (1.0 - np.abs(reps[strict]) ** 2) * d1[strict]
            j = int(np.argmax(w_here))
            if w_here[j] > lower:
                lower = float(w_here[j])
                witness = complex(reps[strict][j])

        upper = float(np.max(cell_upper))
        if upper - lower <= target_rel_width * max(upper, 1e-12) or upper <= 1e-300:
            break
        # keep only cells that can still beat the lower bound
        live = cell_upper > lower * (1.0 + 0.25 * target_rel_width)
        if not np.any(live):
            upper = lower * (1.0 + 0.25 * target_rel_width)
            break
        centers = centers[live]
        halfw = halfw[live]
        if total_cells + 4 * centers.size > max_cells:
            break
        # quarter each surviving cell
        q = 0.5 * halfw
        offs = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
        centers = (centers[:, None] + q[:, None] * offs[None, :]).ravel()
        halfw = np.repeat(q, 4)
        total_cells += centers.size

    if upper - lower > target_rel_width * max(upper, 1e-12) and upper > 1e-12:
        raise CertificationFailure(
            f"bracket stalled at width {upper - lower:.3e} "
            f"(target {target_rel_width:.1e} relative, {total_cells} cells)"
        )
    return CertBracket(
        scale * lower,
        scale * upper,
        witness,
        "adaptive-grid-max",
        "taylor-remainder-cells",
        evaluations,
    )


# ---------------------------------------------------------------------------
# Test families


@dataclass(frozen=True)
class TestFamily:
    """Scalar normalized functions with certified seminorm bounds <= 1,
    standing in for the unit ball in the defining supremum."""

    __test__ = False  # not a test case, despite the name

    members: tuple[HoloExpr, ...]
    certificates: tuple[float, ...]
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("empty family")
        if not (len(self.members) == len(self.certificates) == len(self.provenance)):
            raise ValueError("members/certificates/provenance length mismatch")
        seen = set()
        for g, cert in zip(self.members, self.certificates):
            if g.dim != 1:
                raise ValueError("family members must be scalar-valued")
            if cert > 1.0 + 1e-12:
                raise CertificationFailure(f"member certificate {cert} exceeds 1")
            if abs(complex(g.value(0.0j)[0])) > 1e-12:
                raise CertificationFailure("family member not normalized at 0")
            key = expr_to_dict(g)
            key = repr(key)
            if key in seen:
                raise ValueError("duplicate family member")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.members)

    def derivatives_at(self, zs) -> np.ndarray:
        """|g_k'(z_j)| matrix of shape (len(zs), len(members))... complex values."""
        zs = np.asarray([z.value if isinstance(z, DiscPoint) else z for z in zs])
        cols = [g.derivative(zs)[..., 0] for g in self.members]
        return np.stack(cols, axis=-1)

    def union(self, other: "TestFamily") -> "TestFamily":
        members = list(self.members)
        certs = list(self.certificates)
        prov = list(self.provenance)
        seen = {repr(expr_to_dict(g)) for g in members}
        for g, c, p in zip(other.members, other.certificates, other.provenance):
            key = repr(expr_to_dict(g))
            if key not in seen:
                members.append(g)
                certs.append(c)
                prov.append(p)
                seen.add(key)
        return TestFamily(tuple(members), tuple(certs), tuple(prov))


def _phase_convex_member(centers: np.ndarray, rng: np.random.Generator) -> HoloExpr:
    k = int(rng.integers(2, min(4, len(centers)) + 1))
    chosen = rng.choice(len(centers), size=k, replace=False)
    weights = rng.dirichlet(np.ones(k))
    phases = np.exp(2j * np.pi * rng.random(k))
    coefs = weights * phases
    total = float(np.sum(np.abs(coefs)))
    if total > 1.0:  # keep the convexity certificate exactly 1
        coefs = coefs / total
    return Sum(tuple(Scale(c, Extremal(centers[i])) for c, i in zip(coefs, chosen)))


def make_family(recipe: dict, seed: int = 0) -> TestFamily:
    """Build a certified family from a recipe dict with any of the keys

    - "extremal_grid": {"centers": [[re,im],...]} or {"n": int, "mode": str}
    - "phase_convex": {"count": int, "centers": [...] (optional)}
    - "normalized_polynomials": {"count": int, "degree": int}
    """
    if not recipe:
        raise ValueError("empty family recipe")
    rng = np.random.default_rng(seed)
    members: list[HoloExpr] = []
    certs: list[float] = []
    prov: list[str] = []

    def _centers_from(block) -> np.ndarray:
        if "centers" in block:
            return np.asarray(
                [complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
                 for c in block["centers"]]
            )
        from .disc import sample_disc

        pts = sample_disc(
            int(block.get("n", 16)),
            block.get("mode", "pseudo_hyperbolic"),
            seed=int(block.get("seed", seed)),
        )
        return np.asarray([p.value for p in pts])

    grid_centers = None
    if "extremal_grid" in recipe:
        grid_centers = _centers_from(recipe["extremal_grid"])
        for a in grid_centers:
            members.append(Extremal(complex(a)))
            certs.append(1.0)
            prov.append("extremal")
    if "phase_convex" in recipe:
        block = recipe["phase_convex"]
        centers = _centers_from(block) if "centers" in block or grid_centers is None else grid_centers
        for _ in range(int(block["count"])):
            members.append(_phase_convex_member(centers, rng))
            certs.append(1.0)
            prov.append("phase_convex")
    if "normalized_polynomials" in recipe:
        block = recipe["normalized_polynomials"]
        degree = int(block["degree"])
        for _ in range(int(block["count"])):
            coeffs = rng.standard_normal(degree) + 1j * rng.standard_normal(degree)
            poly = Sum(
                tuple(Scale(complex(c), Monomial(k + 1)) for k, c in enumerate(coeffs))
            )
            bracket = bloch_seminorm_bracket(poly, target_rel_width=1e-6)
            if not math.isfinite(bracket.upper) or bracket.upper <= 0.0:
                raise CertificationFailure("polynomial member could not be certified")
            members.append(Scale(1.0 / bracket.upper, poly))
            certs.append(1.0)
            prov.append("normalized_polynomial")
    if not members:
        raise ValueError(f"recipe produced no members: {sorted(recipe)}")
    return TestFamily(tuple(members), tuple(certs), tuple(prov))


def default_family(points, extras: int = 8, convex: int = 8, seed: int = 0) -> TestFamily:
    """Extremals at the sample points (guaranteeing attainment) plus extra
    extremal centers and phase-convex combinations."""
    centers = [
        complex(z.value if isinstance(z, DiscPoint) else z) for z in points
    ]
    recipe = {"extremal_grid": {"centers": [[c.real, c.imag] for c in centers]}}
    if extras:
        from .disc import sample_disc

        more = sample_disc(extras, "pseudo_hyperbolic", seed=seed + 1)
        recipe["extremal_grid"]["centers"] += [
            [p.value.real, p.value.imag] for p in more
        ]
    if convex:
        recipe["phase_convex"] = {"count": convex}
    return make_family(recipe, seed=seed)


def family_precompose(family: TestFamily, mobius: MobiusMap) -> TestFamily:
    """Transport every member to normalize_origin(g o phi); certificates are
    preserved since precomposition by an automorphism never increases the
    seminorm."""
    members = tuple(
        normalize_origin(PrecomposeMobius(mobius, g)) for g in family.members
    )
    prov = tuple(p + "+mobius" for p in family.provenance)
    return TestFamily(members, family.certificates, prov)


def family_mobius_closure(family: TestFamily, mobius: MobiusMap) -> TestFamily:
    """Family enlarged with the transported members."""
    return family.union(family_precompose(family, mobius))


def family_to_dict(family: TestFamily) -> dict:
    return {
        "members": [expr_to_dict(g) for g in family.members],
        "certificates": list(family.certificates),
        "provenance": list(family.provenance),
    }


def family_from_dict(obj: dict) -> TestFamily:
    if "recipe" in obj:
        return make_family(obj["recipe"], seed=int(obj.get("seed", 0)))
    try:
        members = tuple(expr_from_dict(m) for m in obj["members"])
        certs = tuple(float(c) for c in obj["certificates"])
        prov = tuple(
            obj.get("provenance", ["unspecified"] * len(members))
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed family document: {exc}") from exc
    if len(prov) != len(members):
        prov = tuple(["unspecified"] * len(members))
    return TestFamily(members, certs, prov)
