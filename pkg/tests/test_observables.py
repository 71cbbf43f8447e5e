import numpy as np
import pytest

from msts import MstsState, QuadratureSpec, correlation_variance, optimize_angles, photon_numbers, physicality, second_moments
from msts.limits import TWO_MODE_U
from msts.observables import SameMode, covariance_matrix, eta, symplectic_form
from msts.takagi import SchmidtBasis, takagi_factorize

from conftest import random_symmetric


def one_mode(r, phi, n):
    basis = SchmidtBasis(np.eye(1), [1.0], [0.0])
    return second_moments(MstsState([r], [phi], [n]), basis)


def test_squeezed_vacuum_statistics():
    r, phi = 0.8, 0.4
    m = one_mode(r, phi, 0.0)
    assert m.number[0, 0].real == pytest.approx(np.sinh(r) ** 2)
    assert m.pair[0, 0] == pytest.approx(-np.exp(1j * phi) * np.sinh(r) * np.cosh(r))


def test_squeezed_thermal_statistics():
    r, n = 0.5, 0.3
    m = one_mode(r, 1.0, n)
    assert m.number[0, 0].real == pytest.approx(n * np.cosh(2 * r) + np.sinh(r) ** 2)
    assert abs(m.pair[0, 0]) == pytest.approx((2 * n + 1) * np.sinh(r) * np.cosh(r))


def test_vacuum_correlation_variance():
    basis = takagi_factorize(random_symmetric(np.random.default_rng(0), 3))
    m = second_moments(MstsState(np.zeros(3), np.zeros(3), np.zeros(3)), basis)
    for sign in "+-":
        v = correlation_variance(m, QuadratureSpec(0, 2, 0.3, -1.2, sign))
        assert v == pytest.approx(1.0, abs=1e-12)


def test_two_mode_squeezed_vacuum_optimum():
    basis = SchmidtBasis(TWO_MODE_U, [1.0, 1.0], [0.0, 0.0])
    for r in (0.1, 0.7, 1.5):
        m = second_moments(MstsState([r, r], [0.3, 0.3], [0.0, 0.0]), basis)
        for sign in "+-":
            _, _, v = optimize_angles(m, (0, 1), sign)
            assert v == pytest.approx(np.exp(-2 * r), rel=1e-12)


def test_optimum_beats_grid(rng):
    basis = takagi_factorize(random_symmetric(rng, 3, 0.5))
    state = MstsState(rng.uniform(0, 1, 3), rng.uniform(-3, 3, 3), rng.uniform(0, 0.5, 3))
    m = second_moments(state, basis)
    pm, pl, best = optimize_angles(m, (0, 1), "+")
    grid = np.linspace(-np.pi, np.pi, 361)
    vals = [correlation_variance(m, QuadratureSpec(0, 1, a, 0.0, "+")) for a in grid]
    assert best <= min(vals) + 1e-12
    assert best == pytest.approx(min(vals), abs=1e-3)


def test_same_mode_is_rejected():
    with pytest.raises(SameMode):
        QuadratureSpec(1, 1)
    with pytest.raises(SameMode):
        optimize_angles(one_mode(0.1, 0, 0), (0, 0))


def test_eta_and_photon_numbers(rng):
    basis = takagi_factorize(random_symmetric(rng, 4))
    n = rng.uniform(0, 2, 4)
    e = eta(basis, n)
    np.testing.assert_allclose(e, e.conj().T, atol=1e-14)
    assert np.trace(e).real == pytest.approx(n.sum())
    m = second_moments(MstsState(np.zeros(4), np.zeros(4), n), basis)
    per_mode, total = photon_numbers(m)
    np.testing.assert_allclose(per_mode, n, atol=1e-14)
    assert total == pytest.approx(n.sum())


def test_random_states_are_physical(rng):
    for M in (1, 2, 4):
        basis = takagi_factorize(random_symmetric(rng, M))
        for _ in range(20):
            state = MstsState(rng.uniform(0, 2, M), rng.uniform(-3, 3, M), rng.uniform(0, 3, M))
            p = physicality(second_moments(state, basis))
            assert p["hermiticity"] < 1e-12
            assert p["symmetry"] < 1e-12
            assert p["min_eig_number"] > -1e-10
            assert p["min_eig_uncertainty"] > -1e-8


def test_vacuum_covariance():
    m = one_mode(0.0, 0.0, 0.0)
    np.testing.assert_allclose(covariance_matrix(m), 0.5 * np.eye(2), atol=1e-15)
    p = physicality(m)
    assert p["min_eig_uncertainty"] == pytest.approx(0.0, abs=1e-15)


def test_squeezed_covariance_determinant():
    # pure state: det(sigma) = 1/4 per mode
    m = one_mode(1.2, 0.9, 0.0)
    assert np.linalg.det(covariance_matrix(m)) == pytest.approx(0.25, rel=1e-12)


def test_unphysical_moments_are_flagged():
    from msts.observables import SecondMoments

    bad = SecondMoments(np.array([[0.1]]), np.array([[2.0]]))
    assert physicality(bad)["min_eig_uncertainty"] < -0.1


def test_symplectic_form():
    J = symplectic_form(2)
    np.testing.assert_array_equal(J, -J.T)
    np.testing.assert_array_equal(J @ J, -np.eye(4))
