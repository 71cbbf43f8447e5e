"""Second moments, photon numbers and correlation variances of an MSTS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DimensionMismatch, ModelError

__all__ = [
    "SameMode",
    "SecondMoments",
    "QuadratureSpec",
    "eta",
    "second_moments",
    "trajectory_moments",
    "photon_numbers",
    "correlation_variance",
    "optimize_angles",
    "covariance_matrix",
    "symplectic_form",
    "physicality",
]


class SameMode(ModelError):
    pass


@dataclass(frozen=True)
class SecondMoments:
    """``number[m, l] = <b_m^dag b_l>`` and ``pair[m, l] = <b_m b_l>``."""

    number: np.ndarray
    pair: np.ndarray
    t: float = 0.0

    @property
    def M(self):
        return self.number.shape[0]


@dataclass(frozen=True)
class QuadratureSpec:
    """Joint quadratures (X_m +- X_l, Y_m -+ Y_l) at angles phi_m, phi_l."""

    m: int
    l: int
    phi_m: float = 0.0
    phi_l: float = 0.0
    sign: str = "+"

    def __post_init__(self):
        if self.m == self.l:
            raise SameMode(f"correlation variance needs two different modes, got ({self.m}, {self.l})")
        if self.sign not in ("+", "-"):
            raise ModelError("sign must be '+' or '-'")


def eta(basis, n):
    """eta[mu, nu] = sum_m U[m, mu] U*[m, nu] n[m]."""
    n = np.asarray(n, dtype=float)
    if n.shape != (basis.M,):
        raise DimensionMismatch(f"n must have shape ({basis.M},), got {n.shape}")
    U = basis.U
    return (U.T * n) @ U.conj()


def second_moments(state, basis):
    U = basis.U
    c, s = np.cosh(state.r), np.sinh(state.r)
    e = np.exp(1j * state.phi)
    et = eta(basis, state.n)

    N = U.conj() @ (np.outer(c, c) * et) @ U.T
    N += U.conj() @ (np.outer(s * e, s * e.conj()) * et).T @ U.T
    N += (U.conj() * s**2) @ U.T

    X = np.outer(s * e, c) * et
    A = -(U @ X @ U.T + U @ X.T @ U.T) - (U * (c * s * e)) @ U.T
    return SecondMoments(N, A, state.t)


def trajectory_moments(traj):
    return [second_moments(s, traj.basis) for s in traj.states()]


def photon_numbers(moments):
    """Mean photon number per quasimode and their sum."""
    per_mode = np.real(np.diag(moments.number)).copy()
    return per_mode, float(per_mode.sum())


def correlation_variance(moments, spec):
    """Sum of the variances of X_m +- X_l and Y_m -+ Y_l.

    With X = (b e^{-i phi} + h.c.)/2 and Y = (b e^{-i phi} - h.c.)/(2i) the
    single-mode terms combine into N_mm + N_ll + 1 and the squeezing terms
    A_mm, A_ll cancel, leaving

        N_mm + N_ll + 1 +- 2 Re[A_ml exp(-i (phi_m + phi_l))].

    Vacuum gives 1; values below 1 certify inseparability.
    """
    m, l = spec.m, spec.l
    N, A = moments.number, moments.pair
    pm = 1.0 if spec.sign == "+" else -1.0
    cross = 2.0 * np.real(A[m, l] * np.exp(-1j * (spec.phi_m + spec.phi_l)))
    return float(np.real(N[m, m] + N[l, l]) + 1.0 + pm * cross)


def optimize_angles(moments, pair, sign="+"):
    """Quadrature angles minimizing the correlation variance.

    Only phi_m + phi_l matters, so the minimum is reached in closed form
    and split evenly between the two angles.  Returns
    ``(phi_m, phi_l, variance)``.
    """
    m, l = pair
    if m == l:
        raise SameMode(f"correlation variance needs two different modes, got ({m}, {l})")
    a = moments.pair[m, l]
    if abs(a) == 0.0:
        return 0.0, 0.0, correlation_variance(moments, QuadratureSpec(m, l, 0.0, 0.0, sign))
    total = np.angle(a) + (np.pi if sign == "+" else 0.0)
    total = float(np.angle(np.exp(1j * total)))
    spec = QuadratureSpec(m, l, total / 2, total / 2, sign)
    return spec.phi_m, spec.phi_l, correlation_variance(moments, spec)


def symplectic_form(M):
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(J, np.eye(M))


def _quadrature_transform(M):
    # (x_1..x_M, p_1..p_M) = L (b_1..b_M, b_1^dag..b_M^dag)
    I = np.eye(M)
    return np.block([[I, I], [-1j * I, 1j * I]]) / np.sqrt(2)


def _ordered_moments(moments):
    """<xi xi^dag> for xi = (b, b^dag)."""
    N, A = moments.number, moments.pair
    M = N.shape[0]
    return np.block([[np.eye(M) + N.T, A], [A.conj(), N]])


def covariance_matrix(moments):
    """Symmetrized covariance of (x_1..x_M, p_1..p_M); vacuum gives I/2.

    Quadratures are x = (b + b^dag)/sqrt(2), p = (b - b^dag)/(i sqrt(2)).
    """
    L = _quadrature_transform(moments.M)
    K = L @ _ordered_moments(moments) @ L.conj().T
    return np.real(0.5 * (K + K.T))


def physicality(moments):
    """Diagnostics of the Gaussian state described by ``moments``.

    Returns a dict with the Hermiticity and symmetry defects of N and A,
    the smallest eigenvalue of N, and the smallest eigenvalue of
    sigma + (i/2) Omega (the uncertainty relation).
    """
    N, A = moments.number, moments.pair
    M = moments.M
    sigma = covariance_matrix(moments)
    unc = sigma + 0.5j * symplectic_form(M)
    return {
        "hermiticity": float(np.abs(N - N.conj().T).max()),
        "symmetry": float(np.abs(A - A.T).max()),
        "min_eig_number": float(np.linalg.eigvalsh(0.5 * (N + N.conj().T)).min()),
        "min_eig_uncertainty": float(np.linalg.eigvalsh(0.5 * (unc + unc.conj().T)).min()),
    }
