"""Acceptance gate: the ten headline guarantees, each at its stated
tolerance, each reporting a single pass/fail line."""

import json
import math
import time

import numpy as np
import pytest

from blochsum.bloch_norms import (
    bloch_seminorm_bracket,
    default_family,
    extremal,
    family_precompose,
)
from blochsum.cli import main as cli_main
from blochsum.disc import DiscPoint, MobiusMap, sample_disc
from blochsum.holo import PrecomposeMobius, Tensor, normalize_origin, vec_norm
from blochsum.molecules import Molecule, crossnorm_check, cs_lower_dual, cs_upper
from blochsum.summing import (
    WeightedSample,
    factorize,
    lp_duality_check,
    maurey_extrapolate,
    pietsch_lp,
    summing_estimate,
)
from blochsum.verify import _random_function, _random_molecule, seeded_instances

EXPONENTS = (1.0, 1.5, 2.0, 4.0)


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"criterion {num:2d} [{name}]: {status}{suffix}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def lp_instances():
    return seeded_instances(50, seed=0)


@pytest.fixture(scope="module")
def lp_constants(lp_instances):
    out = []
    for f, pts, fam in lp_instances:
        out.append({p: pietsch_lp(f, pts, fam, p) for p in EXPONENTS})
    return out


def test_criterion_1_extremal_identities():
    start = time.perf_counter()
    worst_id = 0.0
    worst_width = 0.0
    for a in sample_disc(20, "polar_grid", seed=0, r_cap=0.9):
        f = extremal(a)
        val = a.conformal_weight() * complex(f.derivative(a.value)[0])
        worst_id = max(worst_id, abs(val - 1.0))
        br = bloch_seminorm_bracket(f, target_rel_width=1e-3)
        # containment up to arithmetic rounding of the exact value 1
        assert br.lower <= 1.0 + 1e-12 and br.upper >= 1.0 - 1e-12
        worst_width = max(worst_width, br.width)
    elapsed = time.perf_counter() - start
    ok = worst_id <= 1e-12 and worst_width <= 1e-3 and elapsed < 5.0
    _report(1, "extremal identities", ok,
            f"id_err={worst_id:.2e} width={worst_width:.2e} t={elapsed:.2f}s")


def test_criterion_2_lp_duality(lp_instances):
    start = time.perf_counter()
    worst = 0.0
    for f, pts, fam in lp_instances:
        for p in EXPONENTS:
            rep = lp_duality_check(f, pts, fam, p)
            worst = max(worst, abs(rep["relative_gap"]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and elapsed < 10.0
    _report(2, "LP minimax duality", ok,
            f"worst_gap={worst:.2e} t={elapsed:.2f}s")


def test_criterion_3_monotonicity(lp_constants):
    worst = math.inf
    for consts in lp_constants:
        cs = [consts[p].constant for p in EXPONENTS]
        for lo, hi in zip(cs[1:], cs[:-1]):
            worst = min(worst, hi - lo)
    ok = worst >= -1e-9
    _report(3, "LP constants non-increasing in p", ok,
            f"worst_decrease={worst:.2e}")


def test_criterion_4_infty_coincidence():
    worst = 0.0
    for k in range(20):
        rng = np.random.default_rng(1000 + k)
        pts = sample_disc(int(rng.integers(3, 9)), "pseudo_hyperbolic",
                          seed=1000 + k)
        fam = default_family(pts, extras=2, convex=2, seed=1000 + k)
        f = _random_function(rng, int(rng.integers(1, 4)))
        lams = tuple(complex(z.conformal_weight()) for z in pts)
        sample = WeightedSample(tuple(zip(lams, pts)))
        est = summing_estimate(f, sample, fam, math.inf)
        sampled = max(
            float(z.conformal_weight() * vec_norm(f.derivative(z.value)))
            for z in pts
        )
        worst = max(worst, abs(est.numerator / est.denominator_family - sampled))
    ok = worst <= 1e-10
    _report(4, "p=infinity ratio equals sampled seminorm", ok,
            f"worst_err={worst:.2e}")


def test_criterion_5_mobius_equivariance():
    rng = np.random.default_rng(0)
    pts = sample_disc(6, "pseudo_hyperbolic", seed=0)
    fam = default_family(pts, extras=3, convex=2, seed=0)
    f = _random_function(rng, 2)
    lams = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    sample = WeightedSample(tuple(zip(map(complex, lams), pts)))
    base = summing_estimate(f, sample, fam, 2.0)
    worst = 0.0
    for _ in range(10):
        a = complex(*rng.standard_normal(2)) * 0.3
        while abs(a) > 0.8:
            a = complex(*rng.standard_normal(2)) * 0.3
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        phi = MobiusMap(complex(math.cos(theta), math.sin(theta)), a)
        inv = phi.inverse()
        moved = WeightedSample(tuple(
            (lam * abs(phi.derivative(z.value)), phi.apply_point(z))
            for lam, z in sample.entries
        ))
        f_m = normalize_origin(PrecomposeMobius(inv, f))
        fam_m = family_precompose(fam, inv)
        est = summing_estimate(f_m, moved, fam_m, 2.0)
        scale = max(abs(base.numerator), 1e-300)
        worst = max(worst, abs(est.numerator - base.numerator) / scale)
        scale = max(abs(base.denominator_family), 1e-300)
        worst = max(
            worst,
            abs(est.denominator_family - base.denominator_family) / scale,
        )
    ok = worst <= 1e-12
    _report(5, "Mobius equivariance of numerator and denominator", ok,
            f"worst_rel_err={worst:.2e}")


def test_criterion_6_factorization(lp_instances, lp_constants):
    worst_res = 0.0
    worst_ratio = 0.0
    for (f, pts, fam), consts in zip(lp_instances, lp_constants):
        measure = consts[2.0]
        cert = factorize(f, pts, measure, 2.0, seed=0)
        worst_res = max(worst_res, cert.residual)
        if measure.constant > 0.0:
            worst_ratio = max(
                worst_ratio, cert.operator_norm_estimate / measure.constant
            )
    ok = worst_res <= 1e-8 and worst_ratio <= 1.0 + 1e-4
    _report(6, "discrete factorization through L2(mu)", ok,
            f"residual={worst_res:.2e} norm_ratio={worst_ratio:.10f}")


def test_criterion_7_maurey_pipeline():
    p, q, depth = 2.0, 4.0, 6
    theta = (q - p) / (q - 1.0)
    theta_err = abs(p - (theta + (1.0 - theta) * q))
    worst_interp = math.inf
    worst_final = math.inf
    for f, pts, fam in seeded_instances(5, seed=7):
        rep = maurey_extrapolate(f, pts, fam, p, q, depth)
        worst_interp = min(worst_interp, rep["interpolation_worst_margin"])
        worst_final = min(worst_final, rep["final_worst_margin"])
        assert abs(rep["extrapolated_constant"]
                   - 2.0 * (2.0 * rep["c_max"]) ** (1.0 / theta)) < 1e-12
    ok = (theta_err <= 1e-12 and worst_interp >= -1e-12 and worst_final >= 0.0)
    _report(7, "exponent extrapolation pipeline", ok,
            f"theta_err={theta_err:.1e} interp={worst_interp:.2e} "
            f"final={worst_final:.2e}")


def test_criterion_8_molecule_sandwich():
    rng = np.random.default_rng(0)
    worst_single = 0.0
    for _ in range(20):
        mol = _random_molecule(rng, 1, int(rng.integers(1, 4)))
        lam, z, x = mol.atoms[0]
        target = abs(lam) * float(vec_norm(np.asarray(x))) / z.conformal_weight()
        for p in (1.0, 2.0, math.inf):
            worst_single = max(worst_single, abs(cs_upper(mol, p) - target))
            worst_single = max(worst_single, abs(cs_lower_dual(mol, p) - target))
    order_ok = True
    cross_ok = True
    for k in range(100):
        mol = _random_molecule(rng, int(rng.integers(2, 5)),
                               int(rng.integers(1, 4)))
        for p in (1.0, 2.0, math.inf):
            up = cs_upper(mol, p)
            lo = cs_lower_dual(mol, p, seed=k)
            order_ok = order_ok and lo <= up + 1e-9
        from blochsum.molecules import default_probes

        probe, value = default_probes(mol, count=1, seed=k)[0]
        cross_ok = cross_ok and crossnorm_check(mol, probe, value, 2.0)["passed"]
    ok = worst_single <= 1e-9 and order_ok and cross_ok
    _report(8, "molecule norm sandwich", ok,
            f"single_err={worst_single:.2e} order={order_ok} cross={cross_ok}")


def test_criterion_9_tensor_exactness():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        a = complex(*rng.standard_normal(2)) * 0.35
        while abs(a) > 0.9:
            a = complex(*rng.standard_normal(2)) * 0.35
        d = int(rng.integers(1, 4))
        x = tuple(complex(re, im) for re, im in rng.standard_normal((d, 2)))
        f = Tensor(extremal(a), x)
        pt = DiscPoint(a)
        sample = WeightedSample(((1.0 + 0.0j, pt),))
        fam = default_family([pt], extras=0, convex=0, seed=0)
        est = summing_estimate(f, sample, fam, 2.0)
        worst = max(worst, abs(est.certified_lower - float(vec_norm(np.asarray(x)))))
    ok = worst <= 1e-10
    _report(9, "tensor functions attain the norm exactly", ok,
            f"worst_err={worst:.2e}")


def test_criterion_10_determinism_gate(capsys):
    start = time.perf_counter()
    payloads = []
    for _ in range(2):
        code = cli_main(["verify", "--json", "--seed", "0"])
        out = capsys.readouterr().out
        assert code == 0
        doc = json.loads(out)
        doc.pop("timing")
        payloads.append(json.dumps(doc, sort_keys=True))
    elapsed = time.perf_counter() - start
    ok = payloads[0] == payloads[1] and elapsed < 60.0
    with capsys.disabled():
        _report(10, "verify is deterministic and fast", ok,
                f"identical={payloads[0] == payloads[1]} t={elapsed:.1f}s")
