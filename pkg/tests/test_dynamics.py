import numpy as np
import pytest

from msts import MstsState, derived_rates, initial_conditions, integrate, rhs, trace_residual, validate
from msts.dynamics import NonFiniteState
from msts.limits import lossless_solution
from msts.model import CouplingSpec, PumpModel, QuasimodeSet
from msts.observables import second_moments
from msts.oracle import moment_ode_oracle
from msts.takagi import SchmidtBasis, schmidt_basis, takagi_factorize

from conftest import random_symmetric


def single_mode(omega=1.0, gamma=0.2, lam=0.05, omega_p=1.0, alpha_sq=1.0):
    model = validate(QuasimodeSet([omega], [gamma]), CouplingSpec.from_matrix([[lam]]))
    return model, schmidt_basis(model.coupling), PumpModel.cw(omega_p, alpha_sq)


def test_single_mode_steady_state():
    # gain kappa = 2 |alpha|^2 |lambda| = gamma / 2 gives tanh(2 r*) = 1/2
    model, basis, pump = single_mode()
    traj = integrate(model, basis, pump, t_end=150.0, n_samples=5)
    r_star = 0.5 * np.arctanh(0.5)
    assert r_star == pytest.approx(0.27465307, abs=1e-8)
    assert traj.r[-1, 0] == pytest.approx(r_star, abs=1e-7)
    assert traj.n[-1, 0] == pytest.approx(np.sinh(r_star) ** 2, abs=1e-7)
    assert traj.n[-1, 0] == pytest.approx(0.077350, abs=1e-6)


def test_initial_conditions_and_first_step():
    model, basis, pump = single_mode(lam=0.05j)
    s0 = initial_conditions(basis)
    np.testing.assert_array_equal(s0.r, 0.0)
    np.testing.assert_array_equal(s0.n, 0.0)
    assert s0.phi[0] == pytest.approx(basis.theta[0] - np.pi / 2)
    dr, dphi, dn = rhs(0.0, s0, derived_rates(model.structure, basis), basis, pump)
    assert dr[0] == pytest.approx(2 * 1.0 * 0.05)
    assert dphi[0] == pytest.approx(model.structure.omega[0] + pump.carrier_rate / 2)
    assert dn[0] == 0.0
    h = 1e-4
    traj = integrate(model, basis, pump, t_end=h, n_samples=2, rtol=1e-12, atol=1e-15)
    assert traj.r[-1, 0] == pytest.approx(h * dr[0], rel=1e-3)


@pytest.mark.parametrize("M", [1, 2, 4])
def test_trace_residual_vanishes(rng, M):
    G = random_symmetric(rng, M, 0.1)
    structure = QuasimodeSet(rng.uniform(0.9, 1.1, M), rng.uniform(0.0, 0.1, M))
    basis = takagi_factorize(G)
    rates = derived_rates(structure, basis)
    for _ in range(50):
        state = MstsState(rng.uniform(0, 2, M), rng.uniform(-np.pi, np.pi, M), rng.uniform(0, 3, M))
        assert abs(trace_residual(state, rates, basis, scaled=True)) < 1e-13


def test_trace_residual_single_mode_value():
    model, basis, _ = single_mode()
    rates = derived_rates(model.structure, basis)
    state = MstsState([1.0], [0.3], [0.5])
    assert abs(trace_residual(state, rates, basis)) < 1e-14


def test_rhs_matches_finite_differences():
    rng = np.random.default_rng(3)
    M = 3
    model = validate(
        QuasimodeSet(rng.uniform(0.9, 1.1, M), rng.uniform(0.01, 0.05, M)),
        CouplingSpec.from_matrix(random_symmetric(rng, M, 0.05)),
    )
    pump = PumpModel.cw(1.0, 1.0)
    traj = integrate(model, pump=pump, t_end=10.0, n_samples=2001, rtol=1e-12, atol=1e-14)
    dr, dphi, dn = traj.derivatives()
    h = traj.t[1] - traj.t[0]
    for x, dx in ((traj.r, dr), (traj.phi, dphi), (traj.n, dn)):
        fd = (x[2:] - x[:-2]) / (2 * h)
        np.testing.assert_allclose(fd, dx[1:-1], atol=1e-5 * max(1.0, np.abs(dx).max()))


def test_lossless_run_matches_closed_form(rng):
    M = 3
    G = random_symmetric(rng, M, 0.05)
    model = validate(QuasimodeSet(np.ones(M), np.zeros(M)), CouplingSpec.from_matrix(G))
    pump = PumpModel.cw(1.0, 2.0)
    basis = schmidt_basis(model.coupling)
    traj = integrate(model, basis, pump, t_end=5.0, n_samples=11, rtol=1e-11, atol=1e-13)
    r, phi = lossless_solution(basis, pump, traj.t[:, None])
    np.testing.assert_allclose(traj.r, r, rtol=1e-8, atol=1e-14)
    np.testing.assert_allclose(traj.phi, phi, rtol=1e-8)
    assert np.abs(traj.n).max() < 1e-12


def test_detuned_amplitude_returning_to_zero():
    # below threshold the squeezing undoes itself periodically
    model = validate(QuasimodeSet([1.3], [0.0]), CouplingSpec.from_matrix([[0.05]]))
    basis = schmidt_basis(model.coupling)
    pump = PumpModel.cw(1.0, 1.0)
    ts = np.linspace(0, 30, 61)
    traj = integrate(model, basis, pump, t_end=30.0, t_eval=ts)
    assert traj.r.min() >= 0
    assert np.sum(np.diff(np.sign(np.diff(traj.r[:, 0]))) > 0) >= 2
    ref = moment_ode_oracle(model, basis, pump, 30.0, t_eval=ts)
    for s, N, A in zip(traj.states(), ref.number, ref.pair):
        m = second_moments(s, basis)
        np.testing.assert_allclose(m.number, N, atol=1e-7)
        np.testing.assert_allclose(m.pair, A, atol=1e-7)


def test_sampling_options():
    model, basis, pump = single_mode()
    a = integrate(model, basis, pump, t_end=1.0, output_stride=0.3)
    np.testing.assert_allclose(a.t, [0.0, 0.3, 0.6, 0.9, 1.0])
    b = integrate(model, basis, pump, t_end=1.0, n_samples=3)
    np.testing.assert_allclose(b.t, [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        integrate(model, basis, pump, t_end=1.0, t_eval=[0.5, 0.2])
    with pytest.raises(ValueError):
        integrate(model, basis, None, t_end=1.0)
    with pytest.raises(ValueError):
        integrate(model, basis, pump, t_end=0.0)


def test_non_finite_state_is_rejected():
    model, basis, pump = single_mode()
    rates = derived_rates(model.structure, basis)
    with pytest.raises(NonFiniteState):
        rhs(0.0, MstsState([np.nan], [0.0], [0.0]), rates, basis, pump)


def test_trajectory_is_deterministic():
    model, basis, pump = single_mode()
    a = integrate(model, basis, pump, t_end=3.0, n_samples=7)
    b = integrate(model, basis, pump, t_end=3.0, n_samples=7)
    assert a.r.tobytes() == b.r.tobytes() and a.n.tobytes() == b.n.tobytes()


def test_zero_coupling_stays_vacuum():
    model = validate(QuasimodeSet([1.0, 1.1], [0.05, 0.05]), CouplingSpec.from_matrix(np.zeros((2, 2))))
    traj = integrate(model, pump=PumpModel.cw(1.0, 1.0), t_end=2.0, n_samples=3)
    np.testing.assert_array_equal(traj.r, 0.0)
    np.testing.assert_array_equal(traj.n, 0.0)


def test_schmidt_basis_shape_check():
    model, _, pump = single_mode()
    bad = SchmidtBasis(np.eye(2), [0.1, 0.1], [0.0, 0.0])
    with pytest.raises(ValueError):
        integrate(model, bad, pump, t_end=1.0)
