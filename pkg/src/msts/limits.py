"""Closed-form and reduced reference solutions.

* lossless modes: r grows with the integrated pump, phi turns at 2 Omega_mumu
* one lossy mode
* two lossy modes sharing one squeezing amplitude and phase

The reduced right-hand sides assume the phase condition
Re[alpha^2 lambda exp(-i phi)] = 0, under which they are exact
specializations of :func:`msts.dynamics.rhs`.
"""

from __future__ import annotations

import numpy as np

from .model import DimensionMismatch

__all__ = [
    "lossless_solution",
    "single_mode_rhs",
    "two_mode_rhs",
    "phase_condition_residual",
    "TWO_MODE_U",
]

TWO_MODE_U = 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]])


def lossless_solution(basis, pump, t, t_i=0.0, omega_diag=None):
    """Amplitudes and phases of the multimode squeezed vacuum.

    r_mu(t) = 2 |lambda_mu| * integral of |alpha|^2 from t_i to t, and
    phi_mu(t) = 2 (t - t_i) Omega_mumu + theta_mu - pi/2.  ``omega_diag``
    holds Omega_mumu and defaults to the pump resonance nu/2, the only case
    in which the phase condition survives a lossless run.
    """
    if omega_diag is None:
        omega_diag = np.full(basis.M, 0.5 * pump.carrier_rate)
    omega_diag = np.asarray(omega_diag, dtype=float)
    r = 2.0 * basis.lambda_abs * pump.integrated_drive(t, t_i)
    phi = 2.0 * (t - t_i) * omega_diag + basis.theta - np.pi / 2
    return r, phi


def single_mode_rhs(state, omega1, gamma1, lam, pump, t):
    """(dr, dphi, dn) for one lossy mode."""
    if state.M != 1:
        raise DimensionMismatch("single_mode_rhs needs a one-mode state")
    r, n = state.r[0], state.n[0]
    kappa = 2.0 * pump.drive_magnitude(t) * abs(lam)
    dr = kappa - 2.0 * gamma1 * np.cosh(r) * np.sinh(r) / (2.0 * n + 1.0)
    dphi = 2.0 * omega1
    dn = 2.0 * gamma1 * (np.sinh(r) ** 2 - n)
    return np.array([dr]), np.array([dphi]), np.array([dn])


def two_mode_rhs(state, omega1, omega2, gamma1, gamma2, lam, pump, t):
    """(dr, dphi, dn1, dn2) for two lossy modes with one shared (r, phi).

    ``state.r`` and ``state.phi`` may carry the shared value once or twice;
    only the first entry is used.
    """
    r, n1, n2 = state.r[0], state.n[0], state.n[1]
    c, s = np.cosh(r), np.sinh(r)
    kappa = 2.0 * pump.drive_magnitude(t) * abs(lam)
    dr = kappa - c * s / (1.0 + n1 + n2) * (gamma1 + gamma2 + (gamma1 - gamma2) * (n2 - n1))
    dphi = omega1 + omega2
    dn1 = 2.0 * n1 * (gamma2 * s**2 - gamma1 * c**2) + 2.0 * gamma2 * s**2
    dn2 = 2.0 * n2 * (gamma1 * s**2 - gamma2 * c**2) + 2.0 * gamma1 * s**2
    return dr, dphi, dn1, dn2


def phase_condition_residual(basis, pump, t, phi):
    """Re[alpha^2 lambda_mu exp(-i phi_mu)] / |alpha^2 lambda_mu|, per mode.

    The drive phase advances as exp(+i nu t), matching the equations of
    motion.
    """
    drive = np.exp(1j * pump.carrier_rate * t)
    x = drive * np.exp(1j * (basis.theta - np.asarray(phi)))
    return x.real
