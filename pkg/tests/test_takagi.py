import numpy as np
import pytest

from msts import integrate, second_moments, validate
from msts.model import CouplingSpec, NotSymmetric, PumpModel, QuasimodeSet
from msts.limits import TWO_MODE_U
from msts.takagi import SchmidtBasis, schmidt_basis, squeezing_matrix_z, takagi_factorize

from conftest import random_symmetric


@pytest.mark.parametrize("M", [1, 2, 3, 5, 8])
def test_random_reconstruction(rng, M):
    for _ in range(20):
        G = random_symmetric(rng, M)
        b = takagi_factorize(G)
        assert np.linalg.norm(b.reconstruct() - G) <= 1e-12 * np.linalg.norm(G)
        assert np.linalg.norm(b.U.conj().T @ b.U - np.eye(M)) <= 1e-12
        assert np.all(np.diff(b.lambda_abs) <= 0)
        assert np.all((b.theta > -np.pi) & (b.theta <= np.pi))


def test_two_mode_degenerate_case():
    G = np.array([[0.0, 1.0], [1.0, 0.0]])
    b = takagi_factorize(G)
    np.testing.assert_allclose(b.lambda_abs, [1.0, 1.0])
    np.testing.assert_allclose(b.reconstruct(), G, atol=1e-15)
    # the textbook unitary for this case is one of the valid factorizations
    np.testing.assert_allclose((TWO_MODE_U * [1, 1]) @ TWO_MODE_U.T, G, atol=1e-15)


def test_exactly_degenerate_random_spectrum(rng):
    M = 6
    Q, _ = np.linalg.qr(rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M)))
    lam = np.array([2.0, 2.0, 2.0, 1.0, 0.5, 0.5]) * np.exp(1j * rng.uniform(-np.pi, np.pi, M))
    G = (Q * lam) @ Q.T
    b = takagi_factorize(G)
    np.testing.assert_allclose(b.lambda_abs, np.sort(np.abs(lam))[::-1], atol=1e-12)
    assert np.linalg.norm(b.reconstruct() - G) <= 1e-12 * np.linalg.norm(G)


def test_rank_deficient_and_zero():
    v = np.array([1.0, 2.0j, -1.0])
    G = np.outer(v, v)
    b = takagi_factorize(G)
    np.testing.assert_allclose(b.reconstruct(), G, atol=1e-13)
    np.testing.assert_allclose(b.lambda_abs[1:], 0.0, atol=1e-13)
    z = takagi_factorize(np.zeros((3, 3)))
    np.testing.assert_array_equal(z.lambda_abs, 0.0)


def test_real_symmetric_matrix(rng):
    A = rng.normal(size=(4, 4))
    A = A + A.T
    b = takagi_factorize(A)
    np.testing.assert_allclose(b.reconstruct(), A, atol=1e-13)


def test_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        takagi_factorize([[0, 1], [2, 0]])


def test_schmidt_input_is_sorted_and_scaled():
    U = np.eye(3)
    c = CouplingSpec.from_schmidt(U, [0.1, 0.3j, 0.2], scale=10.0)
    b = schmidt_basis(c)
    np.testing.assert_allclose(b.lambda_abs, [3.0, 2.0, 1.0])
    np.testing.assert_allclose(b.theta, [np.pi / 2, 0.0, 0.0])
    np.testing.assert_allclose(b.reconstruct(), 10.0 * c.dense())


def test_squeezing_matrix_is_symmetric(rng):
    b = takagi_factorize(random_symmetric(rng, 4))
    z = squeezing_matrix_z(b, rng.uniform(0, 1, 4), rng.uniform(-3, 3, 4))
    np.testing.assert_allclose(z, z.T)


def _rotated(basis, angle):
    c, s = np.cos(angle), np.sin(angle)
    O = np.array([[c, -s], [s, c]])
    return SchmidtBasis(basis.U @ O, basis.lambda_abs, basis.theta)


@pytest.mark.parametrize("gamma", [(0.0, 0.0), (0.03, 0.03)])
def test_degenerate_gauge_does_not_change_observables(gamma):
    # a real rotation inside a degenerate Schmidt block is a gauge freedom
    structure = QuasimodeSet([1.0, 1.0], gamma)
    coupling = CouplingSpec.from_schmidt(TWO_MODE_U, [0.1, 0.1])
    model = validate(structure, coupling)
    pump = PumpModel.cw(1.0, 1.0)
    base = schmidt_basis(coupling)
    ref = integrate(model, base, pump, t_end=6.0, n_samples=7)
    for angle in (0.3, 1.1):
        other = integrate(model, _rotated(base, angle), pump, t_end=6.0, n_samples=7)
        for a, b in zip(ref.states(), other.states()):
            ma, mb = second_moments(a, base), second_moments(b, _rotated(base, angle))
            np.testing.assert_allclose(mb.number, ma.number, atol=1e-9)
            np.testing.assert_allclose(mb.pair, ma.pair, atol=1e-9)
