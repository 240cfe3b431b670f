import numpy as np
import pytest

from blochsum.disc import DiscPoint, MobiusMap, sample_disc
from blochsum.errors import OutOfDisc


def test_disc_point_rejects_boundary():
    DiscPoint(0.999)
    with pytest.raises(OutOfDisc):
        DiscPoint(1.0)
    with pytest.raises(OutOfDisc):
        DiscPoint(0.8 + 0.7j)


def test_mobius_apply_values():
    phi = MobiusMap(1.0, 0.5)
    assert abs(phi(0.0) - 0.5) < 1e-15
    assert abs(phi(0.5)) < 1e-15
    rot = MobiusMap(1j, 0.0)
    assert abs(rot(0.3) - (-0.3j)) < 1e-15


def test_mobius_derivative_values():
    phi = MobiusMap(1.0, 0.5)
    assert abs(phi.derivative(0.0) - (-0.75)) < 1e-15
    assert abs(phi.derivative(0.5) - (-4.0 / 3.0)) < 1e-12
    rot = MobiusMap(1.0, 0.0)
    for z in (0.1, -0.3j, 0.2 + 0.4j):
        assert abs(rot.derivative(z) - (-1.0)) < 1e-15


def test_mobius_derivative_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(30):
        phi = MobiusMap(np.exp(2j * np.pi * rng.random()),
                        0.7 * (rng.random() + 1j * rng.random()) / np.sqrt(2))
        z = 0.8 * (rng.random() - 0.5 + 1j * (rng.random() - 0.5))
        h = 1e-6
        fd = (phi(z + h) - phi(z - h)) / (2 * h)
        assert abs(fd - phi.derivative(z)) < 1e-7 * max(1.0, abs(phi.derivative(z)))
        h2 = 1e-4  # second difference needs a larger step to beat roundoff
        fd2 = (phi(z + h2) - 2 * phi(z) + phi(z - h2)) / h2**2
        assert abs(fd2 - phi.second_derivative(z)) < 1e-5 * max(
            1.0, abs(phi.second_derivative(z))
        )


def test_involution_and_inverse():
    rng = np.random.default_rng(1)
    swap = MobiusMap(1.0, 0.4 - 0.3j)
    for _ in range(100):
        z = 0.9 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        assert abs(swap(swap(z)) - z) < 1e-12
    phi = MobiusMap(np.exp(0.7j), 0.2 + 0.5j)
    inv = phi.inverse()
    for _ in range(50):
        z = 0.9 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        assert abs(inv(phi(z)) - z) < 1e-12
        assert abs(phi(inv(z)) - z) < 1e-12


def test_group_law_via_composition():
    rng = np.random.default_rng(2)
    for _ in range(25):
        phi = MobiusMap(np.exp(2j * np.pi * rng.random()),
                        0.6 * (rng.random() - 0.5 + 1j * (rng.random() - 0.5)))
        psi = MobiusMap(np.exp(2j * np.pi * rng.random()),
                        0.6 * (rng.random() - 0.5 + 1j * (rng.random() - 0.5)))
        comp = phi.compose(psi)
        for _ in range(4):
            z = 0.85 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            assert abs(comp(z) - phi(psi(z))) < 1e-12


def test_sample_disc_polar_grid():
    assert sample_disc(1, "polar_grid")[0].value == 0.0
    a = sample_disc(20, "polar_grid", seed=3)
    b = sample_disc(20, "polar_grid", seed=3)
    assert [p.value for p in a] == [p.value for p in b]
    assert len({p.value for p in a}) == 20
    assert max(p.modulus for p in a) <= 0.95


def test_sample_disc_pseudo_hyperbolic():
    pts = sample_disc(64, "pseudo_hyperbolic", seed=7)
    assert len(pts) == 64
    assert max(p.modulus for p in pts) <= 0.95
    again = sample_disc(64, "pseudo_hyperbolic", seed=7)
    assert [p.value for p in pts] == [p.value for p in again]
    with pytest.raises(ValueError):
        sample_disc(0, "polar_grid")
    with pytest.raises(ValueError):
        sample_disc(4, "no_such_mode")
