import math

import numpy as np
import pytest

from blochsum.bloch_norms import extremal
from blochsum.disc import DiscPoint
from blochsum.errors import DimensionMismatch, ParseError
from blochsum.holo import Monomial, Sum, Tensor
from blochsum.molecules import (
    Molecule,
    crossnorm_check,
    cs_lower_dual,
    cs_upper,
    default_probes,
    molecule_from_dict,
    molecule_to_dict,
    molecules_equivalent,
    pairing,
    projective_upper,
)


def _mol(*atoms):
    d = len(atoms[0][2])
    return Molecule(tuple((complex(l), DiscPoint(z), tuple(x)) for l, z, x in atoms), d)


def test_pairing_examples():
    gamma = _mol((1, 0, (1.0,)))
    assert abs(pairing(gamma, Tensor(Monomial(1), (1.0,))) - 1.0) < 1e-15

    gamma = _mol((1, 0, (1.0, 0.0)), (1j, 0.5, (0.0, 2.0)))
    f = Sum((Tensor(Monomial(1), (1.0, 0.0)), Tensor(Monomial(2), (0.0, 1.0))))
    # f'(0) = (1,0), f'(0.5) = (1,1): pairing = 1 + 2i
    assert abs(pairing(gamma, f) - (1.0 + 2.0j)) < 1e-12

    empty = Molecule((), 2)
    assert pairing(empty, f) == 0.0


def test_pairing_bilinearity():
    rng = np.random.default_rng(20)
    a = _mol((1.2, 0.1, (1.0, 2.0j)), (-0.5j, -0.3, (0.0, 1.0)))
    b = _mol((0.7, 0.4j, (2.0, 0.0)))
    f1 = Tensor(extremal(0.2), (1.0, -1.0))
    f2 = Tensor(Monomial(2), (0.5j, 1.0))
    lhs = pairing(Molecule(a.atoms + b.atoms, 2), f1)
    assert abs(lhs - (pairing(a, f1) + pairing(b, f1))) < 1e-12
    lhs = pairing(a, Sum((f1, f2)))
    assert abs(lhs - (pairing(a, f1) + pairing(a, f2))) < 1e-12


def test_pairing_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        pairing(_mol((1, 0, (1.0, 0.0))), Tensor(Monomial(1), (1.0,)))


def test_projective_upper_examples():
    assert abs(projective_upper(_mol((2, 0.5, (3.0,)))) - 8.0) < 1e-12
    # parallel atoms merge without increasing the value
    two = _mol((1, 0.2, (1.0, 0.0)), (1, 0.2, (1.0, 0.0)))
    one = _mol((2, 0.2, (1.0, 0.0)))
    assert abs(projective_upper(two) - projective_upper(one)) < 1e-12
    # cancellation collapses to zero
    zero = _mol((1, 0.2, (1.0, 0.0)), (-1, 0.2, (1.0, 0.0)))
    assert projective_upper(zero) == 0.0


def test_cs_upper_single_atom_and_p1():
    atom = _mol((1.5j, 0.3, (0.0, 2.0)))
    target = 1.5 * 2.0 / (1.0 - 0.09)
    for p in (1.0, 1.5, 2.0, math.inf):
        assert abs(cs_upper(atom, p) - target) < 1e-12
    rng = np.random.default_rng(21)
    for _ in range(10):
        mol = _mol(*[
            (complex(*rng.standard_normal(2)),
             0.4 * complex(*rng.standard_normal(2)) / 2,
             tuple(complex(*v) for v in rng.standard_normal((2, 2))))
            for _ in range(3)
        ])
        assert abs(cs_upper(mol, 1.0) - projective_upper(mol)) < 1e-12
        # the projective value dominates every p
        for p in (1.5, 2.0, math.inf):
            assert cs_upper(mol, p) <= cs_upper(mol, 1.0) + 1e-9


def test_cs_upper_homogeneity_and_subadditivity():
    a = _mol((1.0, 0.2, (1.0, 0.5j)), (0.5, -0.4, (2.0, 0.0)))
    b = _mol((-0.3j, 0.1j, (0.0, 1.0)))
    lam = 2.5 - 1.0j
    for p in (1.0, 2.0, math.inf):
        assert abs(cs_upper(a.scaled(lam), p) - abs(lam) * cs_upper(a, p)) < 1e-12
        assert cs_upper(a + b, p) <= cs_upper(a, p) + cs_upper(b, p) + 1e-12


def test_single_atom_sandwich_tight():
    rng = np.random.default_rng(22)
    for _ in range(20):
        lam = complex(*rng.standard_normal(2))
        z = 0.45 * complex(*rng.standard_normal(2)) / 2
        x = tuple(complex(*v) for v in rng.standard_normal((3, 2)))
        mol = _mol((lam, z, x))
        target = abs(lam) * np.linalg.norm(x) / (1 - abs(z) ** 2)
        for p in (1.0, 2.0, math.inf):
            up = cs_upper(mol, p)
            lo = cs_lower_dual(mol, p)
            assert abs(up - target) < 1e-9
            assert abs(lo - target) < 1e-9
            assert lo <= up + 1e-9


def test_multi_atom_sandwich_order():
    rng = np.random.default_rng(23)
    for k in range(30):
        atoms = [
            (complex(*rng.standard_normal(2)),
             0.4 * complex(*rng.standard_normal(2)) / 2,
             tuple(complex(*v) for v in rng.standard_normal((2, 2))))
            for _ in range(int(rng.integers(2, 5)))
        ]
        mol = _mol(*atoms)
        for p in (1.0, 2.0, math.inf):
            assert cs_lower_dual(mol, p, seed=k) <= cs_upper(mol, p) + 1e-9


def test_duality_inequality_against_probes():
    rng = np.random.default_rng(24)
    for k in range(20):
        mol = _mol(*[
            (complex(*rng.standard_normal(2)),
             0.4 * complex(*rng.standard_normal(2)) / 2,
             tuple(complex(*v) for v in rng.standard_normal((2, 2))))
            for _ in range(3)
        ])
        for probe, value in default_probes(mol, count=4, seed=k):
            for p in (1.0, 2.0, math.inf):
                p_star = math.inf if p == 1.0 else (1.0 if math.isinf(p) else p / (p - 1))
                assert abs(pairing(mol, probe)) <= value * cs_upper(mol, p_star) + 1e-9


def test_crossnorm_check():
    mol = _mol((1.0, 0.0, (1.0, 0.0)))
    probe, value = default_probes(mol, count=1, seed=0)[0]
    rep = crossnorm_check(mol, probe, value, 2.0)
    assert rep["passed"]
    assert rep["atom_worst"] >= 0.0


def test_representation_moves_preserve_pairing():
    two = _mol((1, 0.2, (1.0, 0.0)), (1, 0.2, (1.0, 0.0)))
    merged = _mol((2, 0.2, (1.0, 0.0)))
    rebalanced = _mol((4, 0.2, (0.5, 0.0)))
    cancel_pad = _mol((2, 0.2, (1.0, 0.0)), (1, 0.5, (0.0, 1.0)), (-1, 0.5, (0.0, 1.0)))
    assert molecules_equivalent(two, merged)
    assert molecules_equivalent(merged, rebalanced)
    assert molecules_equivalent(merged, cancel_pad)
    assert not molecules_equivalent(merged, _mol((1, 0.2, (1.0, 0.0))))


def test_serialization():
    mol = _mol((1.0, 0.1, (1.0, 2.0)), (0.5j, -0.2j, (0.0, 1.0)))
    back = molecule_from_dict(molecule_to_dict(mol))
    assert back.atoms == mol.atoms
    with pytest.raises(ParseError):
        molecule_from_dict([])
    with pytest.raises(ParseError):
        molecule_from_dict([{"lambda": [1, 0]}])
