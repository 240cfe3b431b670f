"""Finite-sample summing constants, domination LP, factorization, extrapolation.

Everything here works on a fixed point set and a certified test family: the
defining supremum over the unit ball is replaced by the max over the family,
and the closed-form majorant |g'(z)| <= 1/(1-|z|^2) turns family values into
certified lower bounds for the true constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch_norms import TestFamily
from .disc import DiscPoint
from .errors import Infeasible, RankDeficiency
from .holo import HoloExpr, vec_norm
from .simplex import simplex_min

__all__ = [
    "WeightedSample",
    "SummingEstimate",
    "PietschMeasure",
    "FactorizationCertificate",
    "denominator",
    "summing_estimate",
    "pietsch_lp",
    "lp_duality_check",
    "domination_check",
    "factorize",
    "maurey_extrapolate",
]

_INF = math.inf


def _c2j(c: complex) -> list[float]:
    return [c.real, c.imag]


@dataclass(frozen=True)
class WeightedSample:
    """Weighted point set (lambda_i, z_i)."""

    entries: tuple[tuple[complex, DiscPoint], ...]

    def __post_init__(self) -> None:
        entries = tuple(
            (complex(lam), z if isinstance(z, DiscPoint) else DiscPoint(z))
            for lam, z in self.entries
        )
        if not entries:
            raise ValueError("sample needs at least one entry")
        object.__setattr__(self, "entries", entries)

    @property
    def lambdas(self) -> np.ndarray:
        return np.asarray([lam for lam, _ in self.entries])

    @property
    def points(self) -> list[DiscPoint]:
        return [z for _, z in self.entries]

    def to_dict(self) -> list[dict]:
        return [
            {"lambda": _c2j(lam), "z": _c2j(z.value)} for lam, z in self.entries
        ]


def _pnorm(values: np.ndarray, p: float) -> float:
    values = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(np.max(values)) if values.size else 0.0
    return float(np.sum(values**p) ** (1.0 / p))


def _weighted_derivs(family: TestFamily, points, absolute: bool = True) -> np.ndarray:
    derivs = family.derivatives_at(points)  # (n, m) complex
    return np.abs(derivs) if absolute else derivs


def _f_deriv_norms(f: HoloExpr, points, norm: str) -> np.ndarray:
    zs = np.asarray([z.value for z in points])
    return vec_norm(f.derivative(zs), norm)


def denominator(sample: WeightedSample, family: TestFamily, p: float):
    """(family max, closed-form majorant) of the weighted derivative p-sum."""
    lam = np.abs(sample.lambdas)
    derivs = _weighted_derivs(family, sample.points)  # (n, m)
    per_member = lam[:, None] * derivs
    if math.isinf(p):
        family_value = float(np.max(per_member)) if per_member.size else 0.0
    else:
        family_value = float(np.max(np.sum(per_member**p, axis=0)) ** (1.0 / p))
    weights = lam / np.array([z.conformal_weight() for z in sample.points])
    closed_form = _pnorm(weights, p)
    return family_value, closed_form


@dataclass(frozen=True)
class SummingEstimate:
    exponent: float
    numerator: float
    denominator_family: float
    denominator_closed_form: float
    certified_lower: float
    heuristic_ratio: float
    witness_point: complex

    def to_dict(self) -> dict:
        return {
            "exponent": "inf" if math.isinf(self.exponent) else self.exponent,
            "numerator": self.numerator,
            "denominator_family": self.denominator_family,
            "denominator_closed_form": self.denominator_closed_form,
            "certified_lower": self.certified_lower,
            "heuristic_ratio": self.heuristic_ratio,
            "witness_point": _c2j(self.witness_point),
        }


def summing_estimate(
    f: HoloExpr, sample: WeightedSample, family: TestFamily, p: float,
    norm: str = "euclidean",
) -> SummingEstimate:
    """Lower estimates for the least summing constant of f.

    certified_lower divides by the closed-form majorant of the ball
    supremum, so it is a true lower bound; heuristic_ratio divides by the
    family max and is sharper but only as good as the family."""
    lam = np.abs(sample.lambdas)
    fn = _f_deriv_norms(f, sample.points, norm)
    numerator = _pnorm(lam * fn, p)
    fam, closed = denominator(sample, family, p)
    witness = sample.points[int(np.argmax(lam * fn))].value

    def _ratio(num: float, den: float) -> float:
        if den > 0.0:
            return num / den
        return 0.0 if num == 0.0 else _INF

    return SummingEstimate(
        exponent=p,
        numerator=numerator,
        denominator_family=fam,
        denominator_closed_form=closed,
        certified_lower=_ratio(numerator, closed),
        heuristic_ratio=_ratio(numerator, fam),
        witness_point=witness,
    )


# ---------------------------------------------------------------------------
# Domination LP


@dataclass(frozen=True)
class PietschMeasure:
    """Discrete probability weights on the family certifying the pointwise
    domination ||f'(z_j)|| <= c (sum_k mu_k |g_k'(z_j)|^p)^(1/p)."""

    family: TestFamily
    weights: tuple[float, ...]
    constant: float
    exponent: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(self.family):
            raise ValueError("one weight per family member required")
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be a probability vector")

    def lp_means(self, points, power: float | None = None) -> np.ndarray:
        """(sum_k mu_k |g_k'(z_j)|^r)^(1/r) at each point (r defaults to the
        stored exponent)."""
        r = self.exponent if power is None else power
        derivs = _weighted_derivs(self.family, points)
        mu = np.asarray(self.weights)
        return (derivs**r @ mu) ** (1.0 / r)

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "constant": self.constant,
            "exponent": self.exponent,
            "family_size": len(self.family),
        }


def _domination_lp(A: np.ndarray, b: np.ndarray, p: float):
    """min sum(w) s.t. A^p w >= b^p, w >= 0 with A = |g_k'(z_j)|, b >= 0.

    Returns (normalized weights, constant (sum w)^(1/p))."""
    Ap = A**p
    bp = np.asarray(b, dtype=float) ** p
    dead = (np.max(Ap, axis=1) <= 1e-300) & (bp > 0.0)
    if np.any(dead):
        j = int(np.where(dead)[0][0])
        raise Infeasible(
            f"point index {j}: every family derivative vanishes but the "
            "target derivative does not"
        )
    w, value = simplex_min(np.ones(Ap.shape[1]), A_ge=Ap, b_ge=bp)
    total = float(np.sum(w))
    if total <= 0.0:
        # zero target derivative everywhere: degenerate zero-constant measure
        mu = np.full(Ap.shape[1], 1.0 / Ap.shape[1])
        return mu, 0.0
    return w / total, total ** (1.0 / p)


def pietsch_lp(
    f: HoloExpr, points, family: TestFamily, p: float, norm: str = "euclidean"
) -> PietschMeasure:
    """Optimal discrete domination measure for f on the given point set."""
    if math.isinf(p):
        raise ValueError("the domination program is defined for finite p only")
    points = [z if isinstance(z, DiscPoint) else DiscPoint(z) for z in points]
    A = _weighted_derivs(family, points)
    b = _f_deriv_norms(f, points, norm)
    mu, c = _domination_lp(A, b, p)
    return PietschMeasure(family, tuple(float(x) for x in mu), c, float(p))


def lp_duality_check(
    f: HoloExpr, points, family: TestFamily, p: float, norm: str = "euclidean"
) -> dict:
    """Solve the domination program and its dual; report the gap.

    The dual maximizes sum u_j ||f'(z_j)||^p over u >= 0 with the family
    rows sum u_j |g_k'(z_j)|^p <= 1; at the optimum it equals the primal
    value (the p-th power of the constant), and u^(1/p) is a witness
    weighting whose summing ratio reproduces the constant."""
    points = [z if isinstance(z, DiscPoint) else DiscPoint(z) for z in points]
    measure = pietsch_lp(f, points, family, p, norm)
    A = _weighted_derivs(family, points)
    b = _f_deriv_norms(f, points, norm)
    Ap = A**p
    u, neg = simplex_min(-(b**p), A_le=Ap.T, b_le=np.ones(Ap.shape[1]))
    dual_value = -neg
    primal_power = measure.constant**p
    rel_gap = abs(primal_power - dual_value) / max(primal_power, 1e-300)
    witness = WeightedSample(
        tuple((complex(uj ** (1.0 / p)), z) for uj, z in zip(u, points))
    )
    est = summing_estimate(f, witness, family, p, norm)
    return {
        "exponent": p,
        "primal_constant": measure.constant,
        "primal_power": primal_power,
        "dual_value": dual_value,
        "relative_gap": rel_gap,
        "witness_ratio": est.heuristic_ratio,
        "witness": witness.to_dict(),
        "measure": measure.to_dict(),
    }


def domination_check(
    f: HoloExpr, zs, measure: PietschMeasure, norm: str = "euclidean"
) -> dict:
    """Margins c * L_p(mu)-mean - ||f'(z)|| at arbitrary points.

    Nonnegative margins are guaranteed only on the solved point set;
    negative margins elsewhere measure the discretization gap."""
    zs = [z if isinstance(z, DiscPoint) else DiscPoint(z) for z in zs]
    means = measure.lp_means(zs)
    fn = _f_deriv_norms(f, zs, norm)
    margins = measure.constant * means - fn
    return {
        "points": [_c2j(z.value) for z in zs],
        "margins": [float(m) for m in margins],
        "min_margin": float(np.min(margins)),
        "violations": int(np.sum(margins < -1e-9)),
    }


# ---------------------------------------------------------------------------
# Factorization


@dataclass(frozen=True)
class FactorizationCertificate:
    points: tuple[DiscPoint, ...]
    measure: PietschMeasure
    operator_matrix: tuple[tuple[complex, ...], ...]  # d x m_kept
    kept_members: tuple[int, ...]
    residual: float
    operator_norm_estimate: float
    span_gap_estimate: float

    def to_dict(self) -> dict:
        return {
            "points": [_c2j(z.value) for z in self.points],
            "operator_matrix": [[_c2j(t) for t in row] for row in self.operator_matrix],
            "kept_members": list(self.kept_members),
            "residual": self.residual,
            "operator_norm_estimate": self.operator_norm_estimate,
            "span_gap_estimate": self.span_gap_estimate,
            "constant": self.measure.constant,
        }


def _ascent_max_ratio(numer, denom, n: int, seed: int, iters: int = 200,
                      restarts: int = 10) -> float:
    """max over complex alpha != 0 of numer(alpha)/denom(alpha) by projected
    gradient ascent; numer must also supply its Wirtinger gradient."""
    rng = np.random.default_rng(seed)
    best = 0.0
    starts = [np.eye(n, dtype=complex)[j] for j in range(min(n, restarts))]
    while len(starts) < restarts:
        starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    for alpha in starts:
        alpha = alpha / max(denom(alpha), 1e-300)
        step = 0.5
        val, grad = numer(alpha)
        for _ in range(iters):
            cand = alpha + step * grad / max(np.linalg.norm(grad), 1e-300)
            cand = cand / max(denom(cand), 1e-300)
            cval, cgrad = numer(cand)
            if cval > val:
                alpha, val, grad = cand, cval, cgrad
                step *= 1.2
            else:
                step *= 0.5
                if step < 1e-12:
                    break
        best = max(best, val)
    return best


def factorize(
    f: HoloExpr, points, measure: PietschMeasure, p: float,
    norm: str = "euclidean", seed: int = 0,
) -> FactorizationCertificate:
    """Interpolating operator T with T u_j = f'(z_j) in the mu^(1/p)-weighted
    family coordinates u_j, plus a norm certificate.

    operator_norm_estimate bounds sup ||sum_j a_j f'(z_j)|| over coefficient
    vectors with sum_j |a_j| ||v_j||_{L_p(mu)} = 1; the domination constraint
    makes this at most the constant c, and it is what the commuting-diagram
    argument controls on a finite point set.  span_gap_estimate is the same
    supremum measured against ||sum_j a_j v_j||_{L_p(mu)} instead; it can
    exceed c and quantifies how far the finite family is from the full ball.
    """
    points = tuple(z if isinstance(z, DiscPoint) else DiscPoint(z) for z in points)
    mu = np.asarray(measure.weights)
    kept = tuple(int(k) for k in np.where(mu > 1e-14)[0])
    if not kept:
        raise RankDeficiency("measure has no support")
    V = measure.family.derivatives_at(points)[:, kept]  # (n, m_kept) complex
    mu_k = mu[list(kept)]
    U = (mu_k ** (1.0 / p))[None, :] * V  # rows: weighted coordinates of v_j
    zs = np.asarray([z.value for z in points])
    F = f.derivative(zs)  # (n, d)

    X, *_ = np.linalg.lstsq(U, F, rcond=None)  # (m_kept, d)
    T = X.T  # (d, m_kept) with T @ U[j] ~= F[j]
    residual = float(np.max(vec_norm(U @ X - F, norm))) if F.size else 0.0
    if residual > 1e-8:
        raise RankDeficiency(
            f"inconsistent interpolation data, residual {residual:.3e} "
            "(discretization too coarse)"
        )

    n = len(points)
    n_j = measure.lp_means(points)  # ||v_j||_{L_p(mu)}
    M = F.T  # (d, n), columns f'(z_j)

    def numer(alpha):
        img = M @ alpha
        val = float(np.linalg.norm(img))
        grad = np.conj(M).T @ img / max(val, 1e-300)
        return val, grad

    def denom_l1(alpha):
        return float(np.sum(np.abs(alpha) * n_j))

    operator_norm = _ascent_max_ratio(numer, denom_l1, n, seed)

    def span_denom(alpha):
        combo = np.abs(np.tensordot(alpha, V, axes=(0, 0)))  # (m_kept,)
        return float((np.sum(mu_k * combo**p)) ** (1.0 / p))

    span_gap = _ascent_max_ratio(numer, span_denom, n, seed + 1)

    return FactorizationCertificate(
        points=points,
        measure=measure,
        operator_matrix=tuple(tuple(complex(t) for t in row) for row in T),
        kept_members=kept,
        residual=residual,
        operator_norm_estimate=operator_norm,
        span_gap_estimate=span_gap,
    )


# ---------------------------------------------------------------------------
# Extrapolation


def maurey_extrapolate(
    f: HoloExpr, points, family: TestFamily, p: float, q: float, depth: int,
    norm: str = "euclidean",
) -> dict:
    """Iterated domination measures and the truncated geometric mixture.

    Starting from the exponent-q measure for f, each stage solves the
    exponent-p program whose targets are the previous stage's L_q means, and
    the mixture lambda = sum 2^-(n+1) mu_n (renormalized) satisfies the
    extrapolated comparison  L_q(mu_0) mean <= C * L_1(lambda) mean  with
    C = 2 (2 c_max)^(1/theta) at every solved point."""
    if not 1.0 < p < q < _INF:
        raise ValueError("need 1 < p < q < inf")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    points = [z if isinstance(z, DiscPoint) else DiscPoint(z) for z in points]
    theta = (q - p) / (q - 1.0)
    A = _weighted_derivs(family, points)  # (n, m)

    b = _f_deriv_norms(f, points, norm)
    mu, c = _domination_lp(A, b, q)
    measures = [mu]
    constants = [c]
    for _ in range(depth):
        b = (A**q @ measures[-1]) ** (1.0 / q)  # stage L_q means
        mu, c = _domination_lp(A, b, p)
        measures.append(mu)
        constants.append(c)

    mix = sum(2.0 ** -(n + 1) * m for n, m in enumerate(measures))
    truncation_mass = 2.0 ** -(depth + 1)
    mix = mix / mix.sum()

    # interpolation margins (integral three-line form), relative
    interp_worst = _INF
    for mu_n in measures[1:]:
        m1 = A @ mu_n
        mp = A**p @ mu_n
        mq = A**q @ mu_n
        rhs = m1**theta * mq ** (1.0 - theta)
        margin = (rhs - mp) / np.maximum(mp, 1e-300)
        interp_worst = min(interp_worst, float(np.min(margin)))

    c_max = max(constants)
    big_c = 2.0 * (2.0 * c_max) ** (1.0 / theta)
    lhs = (A**q @ measures[0]) ** (1.0 / q)
    rhs = big_c * (A @ mix)
    final_margins = rhs - lhs

    return {
        "exponents": {"p": p, "q": q},
        "theta": theta,
        "depth": depth,
        "stage_constants": [float(c) for c in constants],
        "c_max": float(c_max),
        "extrapolated_constant": float(big_c),
        "mixture_weights": [float(w) for w in mix],
        "truncation_mass": truncation_mass,
        "interpolation_worst_margin": interp_worst,
        "final_margins": [float(m) for m in final_margins],
        "final_worst_margin": float(np.min(final_margins)),
    }
