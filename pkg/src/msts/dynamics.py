"""Equations of motion for the multimode squeezed thermal state.

The state is described by squeezing amplitudes ``r`` and phases ``phi`` per
Schmidt mode and thermal photon numbers ``n`` per quasimode, 3M real
numbers in total.  The drive enters through

    X_mu = alpha^2 lam_mu exp(-i phi_mu)

with the drive phase advancing as exp(+i nu t) (nu = 2 omega_p for SFWM).
This is the complex conjugate of ``PumpModel.drive``; see
``docs/moment_equations.md`` for why the equations need this pairing.

Integration runs in a frame co-rotating with the drive: psi = phi - nu t
replaces phi, so the fast carrier never reaches the step-size controller.
Reported phases are unwrapped lab-frame values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .model import DimensionMismatch
from .takagi import schmidt_basis

__all__ = [
    "NonFiniteState",
    "StepSizeUnderflow",
    "MstsState",
    "DerivedRates",
    "Trajectory",
    "derived_rates",
    "rhs",
    "initial_conditions",
    "integrate",
    "trace_residual",
]

log = logging.getLogger(__name__)

R_FLOOR = 1e-10
DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


class NonFiniteState(FloatingPointError):
    pass


class StepSizeUnderflow(RuntimeError):
    pass


@dataclass(frozen=True)
class MstsState:
    r: np.ndarray
    phi: np.ndarray
    n: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("r", "phi", "n"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float))
        if not (self.r.shape == self.phi.shape == self.n.shape) or self.r.ndim != 1:
            raise DimensionMismatch("r, phi and n must be 1-D arrays of equal length")

    @property
    def M(self):
        return self.r.size

    @property
    def phi_wrapped(self):
        return np.angle(np.exp(1j * self.phi))


@dataclass(frozen=True)
class DerivedRates:
    """Loss and frequency matrices in the Schmidt basis."""

    Gamma: np.ndarray
    Omega: np.ndarray


def derived_rates(structure, basis):
    """Gamma_{mu nu} = 2 sum_m gamma_m U*_{m mu} U_{m nu}, Omega likewise with omega_m."""
    if structure.M != basis.M:
        raise DimensionMismatch(f"{structure.M} quasimodes but a {basis.M}-mode basis")
    U = basis.U
    Gamma = 2.0 * (U.conj().T * structure.gamma) @ U
    Omega = (U.conj().T * structure.omega) @ U
    Gamma = 0.5 * (Gamma + Gamma.conj().T)
    Omega = 0.5 * (Omega + Omega.conj().T)
    return DerivedRates(Gamma, Omega)


class _Kernel:
    """Precomputed pieces of the right-hand side for one (rates, basis) pair."""

    def __init__(self, rates, basis, r_floor=R_FLOOR):
        U = basis.U
        self.M = basis.M
        self.U = U
        self.lam_abs = basis.lambda_abs
        self.theta = basis.theta
        self.Gamma = rates.Gamma
        self.GammaT = rates.Gamma.T.copy()
        self.Omega_diag = np.real(np.diag(rates.Omega))
        self.r_floor = r_floor
        # P[m, mu, nu] = U_{m nu} U*_{m mu}
        self.P = U[:, None, :] * U.conj()[:, :, None]
        self.Pflat = self.P.reshape(self.M, -1)

    def n_dot(self, r, psi, n):
        c, s = np.cosh(r), np.sinh(r)
        v = self.U * (s * np.exp(1j * psi))
        u = self.U * c
        gain = np.einsum("mn,nk,mk->m", v, self.Gamma.conj(), v.conj()).real
        loss = np.einsum("mn,nk,mk->m", u, self.Gamma, u.conj()).real
        return (1.0 + n) * gain - n * loss

    def evaluate(self, r, psi, n, drive_abs, nu):
        """Rates of (r, psi, n) with psi = phi - nu t and drive |alpha|^2."""
        M = self.M
        c, s = np.cosh(r), np.sinh(r)
        e = np.exp(1j * psi)
        X = drive_abs * self.lam_abs * np.exp(1j * self.theta) / e

        w = (1.0 - n[:, None] + n[None, :]) / (1.0 + n[:, None] + n[None, :])
        # Q[mu, nu, sigma] = sum_{m,l} U_{m nu} U*_{m mu} w_{ml} U_{l sigma} U*_{l mu}
        Q = np.einsum("mun,ml,lus->uns", self.P, w, self.P, optimize=False)
        Y = np.einsum("n,ns,uns,s->u", c, self.Gamma, Q, s * e) / e

        dr = 2.0 * X.imag - Y.real
        singular = np.abs(r) < self.r_floor
        with np.errstate(divide="ignore", invalid="ignore"):
            dphi = 2.0 * self.Omega_diag - 4.0 * X.real / np.tanh(2.0 * r) - Y.imag / (c * s)
        dphi = np.where(singular, self.Omega_diag + 0.5 * nu, dphi)

        dn = self.n_dot(r, psi, n)
        return dr, dphi - nu, dn

    def trace_residual(self, r, psi, n):
        c, s = np.cosh(r), np.sinh(r)
        dn = self.n_dot(r, psi, n)
        x = n / (1.0 + n)
        eta_x = (self.U * x[:, None]).T @ self.U.conj()
        res = np.sum(dn / (1.0 + n)) - np.sum(np.real(np.diag(self.Gamma)) * s**2)
        res += np.real(np.sum(self.Gamma * np.outer(c, c) * eta_x))
        return res

    def residual_scale(self, r):
        return max(float(np.sum(np.real(np.diag(self.Gamma)) * np.cosh(r) ** 2)), 1e-300)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteState("state contains NaN or Inf")


def rhs(t, state, rates, basis, pump, r_floor=R_FLOOR):
    """Time derivatives (dr, dphi, dn) of the MSTS parameters at time ``t``.

    ``pump`` supplies |alpha(t)|^2 and the carrier; whenever r_mu is below
    ``r_floor`` the indeterminate terms of dphi_mu are replaced so that
    dphi_mu = Omega_mumu + nu / 2.
    """
    _check_finite(state.r, state.phi, state.n)
    if state.M != basis.M:
        raise DimensionMismatch(f"state has {state.M} modes, basis has {basis.M}")
    nu = pump.carrier_rate
    psi = state.phi - nu * t
    kern = _Kernel(rates, basis, r_floor)
    dr, dpsi, dn = kern.evaluate(state.r, psi, state.n, float(pump.drive_magnitude(t)), nu)
    return dr, dpsi + nu, dn


def trace_residual(state, rates, basis, scaled=False):
    """Coefficient of the identity operator left over by (r, phi, n).

    Analytically zero.  With ``scaled=True`` the value is divided by
    sum_mu Gamma_mumu cosh^2 r_mu.
    """
    kern = _Kernel(rates, basis)
    res = kern.trace_residual(state.r, state.phi, state.n)
    if scaled:
        res /= kern.residual_scale(state.r)
    return float(res)


def initial_conditions(basis, pump=None):
    """Vacuum start: r = 0, n = 0 and phi_mu = theta_mu - pi/2."""
    M = basis.M
    return MstsState(np.zeros(M), basis.theta - np.pi / 2, np.zeros(M), 0.0)


@dataclass
class Trajectory:
    """Sampled solution of the MSTS equations.

    Arrays ``r``, ``phi`` and ``n`` have shape (samples, M); ``phi`` is the
    unwrapped lab-frame phase.
    """

    t: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    n: np.ndarray
    trace_residual: np.ndarray
    scaled_trace_residual: np.ndarray
    basis: object
    rates: DerivedRates
    pump: object
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    @property
    def M(self):
        return self.r.shape[1]

    @property
    def phi_wrapped(self):
        return np.angle(np.exp(1j * self.phi))

    def state(self, i):
        return MstsState(self.r[i], self.phi[i], self.n[i], float(self.t[i]))

    def states(self):
        return [self.state(i) for i in range(len(self))]

    def derivatives(self):
        """Right-hand side evaluated at every sample, shapes as ``r``."""
        out = [rhs(s.t, s, self.rates, self.basis, self.pump) for s in self.states()]
        return tuple(np.array(x) for x in zip(*out))


def _sample_times(t_end, output_stride, n_samples, t_eval):
    if t_eval is not None:
        ts = np.asarray(t_eval, dtype=float)
        if ts.ndim != 1 or ts.size == 0 or np.any(np.diff(ts) <= 0) or ts[0] < 0 or ts[-1] > t_end:
            raise ValueError("t_eval must be increasing and lie within [0, t_end]")
        return ts
    if output_stride is not None:
        if output_stride <= 0:
            raise ValueError("output_stride must be positive")
        ts = np.arange(0.0, t_end, output_stride)
        return np.append(ts[ts < t_end * (1 - 1e-12)], t_end)
    return np.linspace(0.0, t_end, int(n_samples or 201))


def integrate(
    model,
    basis=None,
    pump=None,
    t_end=1.0,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    output_stride=None,
    n_samples=None,
    t_eval=None,
    method="RK45",
    r_floor=R_FLOOR,
    max_step=np.inf,
    max_flips=10_000,
):
    """Integrate the MSTS equations from the vacuum.

    Parameters
    ----------
    model : Model
        Validated structure and coupling.
    basis : SchmidtBasis, optional
        Defaults to the Takagi basis of ``model.coupling``.
    pump : PumpModel
    t_end : float
        Final time, in the same unit as the inverse rates.
    output_stride, n_samples, t_eval
        Output sampling: a fixed spacing, a number of equally spaced
        samples, or explicit times.  ``t = 0`` and ``t_end`` are always
        included for the first two.
    method : str
        Any explicit :func:`scipy.integrate.solve_ivp` method; the default is
        the Dormand-Prince 5(4) pair with its 4th-order dense output.

    If an amplitude dips below ``-r_floor`` the integration stops there,
    the gauge r -> -r, phi -> phi + pi is applied and the run continues.
    """
    if pump is None:
        raise ValueError("a pump model is required")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not (rtol > 0 and atol > 0):
        raise ValueError("tolerances must be positive")
    if basis is None:
        basis = schmidt_basis(model.coupling)
    rates = derived_rates(model.structure, basis)
    kern = _Kernel(rates, basis, r_floor)
    M = basis.M
    nu = pump.carrier_rate
    ts = _sample_times(t_end, output_stride, n_samples, t_eval)

    def f(t, y):
        dr, dpsi, dn = kern.evaluate(y[:M], y[M : 2 * M], y[2 * M :], float(pump.drive_magnitude(t)), nu)
        return np.concatenate([dr, dpsi, dn])

    def make_event(mu):
        def ev(t, y):
            return y[mu] + r_floor

        ev.terminal = True
        ev.direction = -1
        return ev

    events = [make_event(mu) for mu in range(M)]

    s0 = initial_conditions(basis, pump)
    y = np.concatenate([s0.r, s0.phi, s0.n])
    t0 = 0.0
    t_out, y_out = [], []
    stats = {"nfev": 0, "naccepted_segments": 0, "gauge_flips": []}
    while True:
        seg = ts[(ts >= t0) & (ts <= t_end)]
        if t_out:
            seg = seg[seg > t_out[-1][-1]] if t_out[-1].size else seg
        sol = solve_ivp(
            f, (t0, t_end), y, method=method, rtol=rtol, atol=atol,
            t_eval=seg, events=events, max_step=max_step,
        )
        stats["nfev"] += int(sol.nfev)
        stats["naccepted_segments"] += 1
        if sol.status == -1:
            raise StepSizeUnderflow(f"integration failed at t = {sol.t[-1] if sol.t.size else t0}: {sol.message}")
        if sol.y.size and not np.all(np.isfinite(sol.y)):
            raise NonFiniteState("integration produced non-finite values")
        t_out.append(sol.t)
        y_out.append(sol.y)
        if sol.status == 0:
            break
        # a terminal event: flip the gauge of the offending amplitude(s)
        hit = [mu for mu in range(M) if sol.t_events[mu].size]
        te = float(sol.t_events[hit[0]][0])
        y = sol.y_events[hit[0]][0].copy()
        for mu in range(M):
            if y[mu] < 0:
                y[mu] = -y[mu]
                y[M + mu] += np.pi
                stats["gauge_flips"].append((te, mu))
                log.info("gauge flip of Schmidt mode %d at t = %.6g", mu, te)
        if len(stats["gauge_flips"]) > max_flips:
            raise StepSizeUnderflow("too many gauge flips; the amplitude is chattering around zero")
        t0 = te
        if t0 >= t_end:
            break

    t = np.concatenate(t_out)
    Y = np.concatenate(y_out, axis=1)
    r = Y[:M].T.copy()
    psi = Y[M : 2 * M].T
    n = Y[2 * M :].T.copy()
    phi = psi + nu * t[:, None]
    res = np.array([kern.trace_residual(r[i], psi[i], n[i]) for i in range(t.size)])
    scale = np.array([kern.residual_scale(r[i]) for i in range(t.size)])
    stats["min_n"] = float(n.min()) if n.size else 0.0
    stats["min_r"] = float(r.min()) if r.size else 0.0
    return Trajectory(t, r, phi, n, res, res / scale, basis, rates, pump, stats)
