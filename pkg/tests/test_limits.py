import numpy as np
import pytest

from msts import MstsState, derived_rates, rhs
from msts.cli import single_mode_reduction_error, two_mode_reduction_error
from msts.limits import TWO_MODE_U, lossless_solution, phase_condition_residual, single_mode_rhs, two_mode_rhs
from msts.model import DimensionMismatch, PumpModel, QuasimodeSet
from msts.takagi import SchmidtBasis


def test_two_mode_unitary():
    np.testing.assert_allclose(TWO_MODE_U.conj().T @ TWO_MODE_U, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(TWO_MODE_U, TWO_MODE_U.T)


def test_single_mode_reduction(rng):
    assert single_mode_reduction_error(rng, 500) < 1e-10


def test_two_mode_reduction(rng):
    assert two_mode_reduction_error(rng, 500) < 1e-10


def test_two_mode_lossless_symmetric_case():
    pump = PumpModel.cw(1.0, 1.0)
    state = MstsState([0.4, 0.4], [-np.pi / 2, -np.pi / 2], [0.0, 0.0])
    dr, dphi, dn1, dn2 = two_mode_rhs(state, 1.0, 1.0, 0.0, 0.0, 0.2, pump, 0.0)
    assert dr == pytest.approx(0.4)
    assert dphi == pytest.approx(2.0)
    assert dn1 == 0.0 and dn2 == 0.0


def test_single_mode_rhs_needs_one_mode():
    with pytest.raises(DimensionMismatch):
        single_mode_rhs(MstsState([0, 0], [0, 0], [0, 0]), 1.0, 0.1, 0.1, PumpModel.cw(1, 1), 0.0)


def test_lossless_solution_decaying_pump():
    basis = SchmidtBasis(np.eye(2), [0.3, 0.1], [0.2, -1.0])
    pump = PumpModel.decaying(1.0, 0.5, 2.0)
    r, phi = lossless_solution(basis, pump, 1.0)
    expected = 2 * np.array([0.3, 0.1]) * 2.0 * (1 - np.exp(-1.0))
    np.testing.assert_allclose(r, expected)
    np.testing.assert_allclose(phi, 2.0 + basis.theta - np.pi / 2)


def test_phase_condition_holds_on_lossless_resonance():
    basis = SchmidtBasis(np.eye(1), [0.2], [0.7])
    pump = PumpModel.cw(1.0, 1.0)
    for t in (0.0, 0.3, 2.0):
        _, phi = lossless_solution(basis, pump, t)
        assert abs(phase_condition_residual(basis, pump, t, phi)[0]) < 1e-12


def test_general_rhs_at_phase_lock_single_mode():
    # explicit spot check of the single-mode reduction
    pump = PumpModel.cw(0.8, 1.5)
    lam = 0.3 * np.exp(0.4j)
    basis = SchmidtBasis.from_lambda(np.eye(1), [lam])
    rates = derived_rates(QuasimodeSet([1.1], [0.07]), basis)
    t = 0.9
    phi = np.angle(lam) + pump.carrier_rate * t - np.pi / 2
    state = MstsState([0.6], [phi], [0.4], t)
    for a, b in zip(rhs(t, state, rates, basis, pump), single_mode_rhs(state, 1.1, 0.07, lam, pump, t)):
        np.testing.assert_allclose(a, b, rtol=1e-12)
