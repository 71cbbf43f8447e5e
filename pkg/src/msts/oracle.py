"""Brute-force references for the MSTS equations.

Two independent backends:

* a truncated Fock-space Lindblad integrator (M <= 2), which checks the
  squeezed-thermal form of the state itself;
* a closed set of linear ODEs for <b^dag b> and <b b>, valid for any M,
  because the generator is quadratic.

Phase convention.  The MSTS equations advance the drive phase as
exp(+i nu t) and the squeezing phases follow it.  The standard-sign
Lindblad equation with the lab-frame drive exp(-i nu t) produces the complex
conjugate picture.  Both backends therefore integrate the standard equation
for the conjugate coupling G* and return conjugated results, which puts
them in the same convention as :mod:`msts.observables`.  The derivation is
in ``docs/moment_equations.md``.

Both backends work in the frame rotating at nu/2 and convert back to the lab
frame at the sample times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .dynamics import StepSizeUnderflow
from .model import DimensionMismatch, ModelError
from .takagi import SchmidtBasis, squeezing_matrix_z

__all__ = [
    "ResourceGuard",
    "CutoffSaturation",
    "FockConfig",
    "FockTrajectory",
    "MomentTrajectory",
    "build_operators",
    "hamiltonian",
    "evolve_fock",
    "msts_density_matrix",
    "fidelity",
    "fock_moments",
    "moment_ode_oracle",
]

MAX_DIM = 4096
SATURATION_THRESHOLD = 1e-6


class ResourceGuard(ModelError):
    pass


class CutoffSaturation(RuntimeError):
    def __init__(self, population, threshold=SATURATION_THRESHOLD, result=None):
        super().__init__(
            f"population {population:.3e} in the top Fock layer exceeds {threshold:.1e}; "
            "raise the cutoff"
        )
        self.population = population
        self.result = result


@dataclass(frozen=True)
class FockConfig:
    model: object
    basis: SchmidtBasis
    pump: object
    cutoff: int

    def __post_init__(self):
        M = self.basis.M
        if M > 2:
            raise ResourceGuard(f"the Fock oracle handles at most 2 modes, got {M}")
        if self.model.M != M:
            raise DimensionMismatch("model and basis disagree on the number of modes")
        _guard(M, self.cutoff)

    @property
    def M(self):
        return self.basis.M

    @property
    def dim(self):
        return (self.cutoff + 1) ** self.M


def _guard(M, cutoff, max_dim=MAX_DIM):
    if int(cutoff) != cutoff or cutoff < 1:
        raise ResourceGuard("cutoff must be an integer >= 1")
    dim = (cutoff + 1) ** M
    if dim > max_dim:
        raise ResourceGuard(f"Hilbert dimension {dim} exceeds the limit {max_dim}")
    return dim


def build_operators(M, cutoff, max_dim=MAX_DIM):
    """Annihilation operators on the truncated product space.

    Basis states are ordered with the photon number of mode 1 running
    fastest.
    """
    _guard(M, cutoff, max_dim)
    b = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)
    eye = np.eye(cutoff + 1)
    ops = []
    for m in range(M):
        factors = [eye] * M
        factors[M - 1 - m] = b
        ops.append(reduce(np.kron, factors))
    return ops


def _occupations(M, cutoff):
    idx = np.arange((cutoff + 1) ** M)
    return np.array([(idx // (cutoff + 1) ** m) % (cutoff + 1) for m in range(M)])


def _coupling_rates(basis):
    return (basis.U * basis.lam) @ basis.U.T


def _pair_operator(G, ops):
    """sum_ml G_ml b_m^dag b_l^dag."""
    K = 0
    for m, bm in enumerate(ops):
        for l, bl in enumerate(ops):
            if G[m, l] != 0:
                K = K + G[m, l] * (bm.T @ bl.T)
    return K if not np.isscalar(K) else np.zeros_like(ops[0])


def hamiltonian(t, model, basis, pump, ops, frame="lab"):
    """H = sum_m omega_m b_m^dag b_m + (d(t) sum_ml G_ml b_m^dag b_l^dag + h.c.).

    d(t) is the pump drive factor (alpha^2 for SFWM, with carrier
    exp(-i nu t)) and G = U diag(lambda) U^T in rate units.  In the
    ``"rotating"`` frame the frequencies are shifted by -nu/2 and the drive
    carrier is removed.
    """
    omega = np.asarray(model.structure.omega, dtype=float)
    if frame == "rotating":
        omega = omega - 0.5 * pump.carrier_rate
        d = pump.drive_magnitude(t)
    elif frame == "lab":
        d = pump.drive(t)
    else:
        raise ValueError(f"unknown frame {frame!r}")
    H = sum(w * (b.T @ b) for w, b in zip(omega, ops)).astype(complex)
    K = d * _pair_operator(_coupling_rates(basis), ops)
    return H + K + K.conj().T


def _conjugate_basis(basis):
    return SchmidtBasis(basis.U.conj(), basis.lambda_abs, -basis.theta)


@dataclass
class FockTrajectory:
    t: np.ndarray
    number: np.ndarray
    pair: np.ndarray
    rho: np.ndarray | None
    top_population: np.ndarray
    trace: np.ndarray
    saturated: bool
    stats: dict = field(default_factory=dict)


def fock_moments(rho, ops):
    """N_ml = tr(rho b_m^dag b_l) and A_ml = tr(rho b_m b_l)."""
    M = len(ops)
    N = np.empty((M, M), complex)
    A = np.empty((M, M), complex)
    for m in range(M):
        for l in range(M):
            N[m, l] = np.trace(rho @ ops[m].T @ ops[l])
            A[m, l] = np.trace(rho @ ops[m] @ ops[l])
    return N, A


def _top_layer_population(rho, occ, cutoff):
    top = np.any(occ == cutoff, axis=0)
    return float(np.real(np.diag(rho))[top].sum())


def evolve_fock(config, t_end, rtol=1e-9, atol=1e-11, t_eval=None, n_samples=21, keep_rho=True, strict=True):
    """Integrate the Lindblad master equation in a truncated Fock space.

    Returns a :class:`FockTrajectory` in the convention of the MSTS
    equations.  With ``strict=True`` a population above 1e-6 in the top
    Fock layer raises :class:`CutoffSaturation`; otherwise it is flagged.
    """
    M, cutoff = config.M, config.cutoff
    ops = build_operators(M, cutoff)
    occ = _occupations(M, cutoff)
    gamma = np.asarray(config.model.structure.gamma, dtype=float)
    pump = config.pump
    nu = pump.carrier_rate
    cbasis = _conjugate_basis(config.basis)

    H0 = hamiltonian(0.0, config.model, cbasis, _NoDrive(pump), ops, frame="rotating")
    K = _pair_operator(_coupling_rates(cbasis), ops)
    V = K + K.conj().T
    loss = sum(g * (b.T @ b) for g, b in zip(gamma, ops))
    H0_eff = H0 - 1j * loss
    jumps = [(2.0 * g, b) for g, b in zip(gamma, ops) if g > 0]
    dim = config.dim

    def f(t, y):
        rho = y.reshape(dim, dim)
        Heff = H0_eff + pump.drive_magnitude(t) * V
        out = -1j * (Heff @ rho - rho @ Heff.conj().T)
        for c, b in jumps:
            out += c * (b @ rho @ b.T)
        return out.ravel()

    ts = np.linspace(0.0, t_end, n_samples) if t_eval is None else np.asarray(t_eval, dtype=float)
    rho0 = np.zeros((dim, dim), complex)
    rho0[0, 0] = 1.0
    sol = solve_ivp(f, (0.0, t_end), rho0.ravel(), method="RK45", rtol=rtol, atol=atol, t_eval=ts)
    if sol.status != 0:
        raise StepSizeUnderflow(f"Fock integration failed: {sol.message}")

    ntot = occ.sum(axis=0)
    Ns, As, rhos, tops, traces = [], [], [], [], []
    for i, t in enumerate(sol.t):
        rho_rot = sol.y[:, i].reshape(dim, dim)
        phase = np.exp(0.5j * nu * t * (ntot[:, None] - ntot[None, :]))
        rho = phase * rho_rot.conj()
        N, A = fock_moments(rho, ops)
        Ns.append(N)
        As.append(A)
        tops.append(_top_layer_population(rho, occ, cutoff))
        traces.append(float(np.real(np.trace(rho))))
        if keep_rho:
            rhos.append(rho)
    tops = np.array(tops)
    result = FockTrajectory(
        sol.t, np.array(Ns), np.array(As), np.array(rhos) if keep_rho else None,
        tops, np.array(traces), bool(tops.max() > SATURATION_THRESHOLD),
        {"nfev": int(sol.nfev), "dim": dim},
    )
    if strict and result.saturated:
        raise CutoffSaturation(float(tops.max()), result=result)
    return result


class _NoDrive:
    def __init__(self, pump):
        self.carrier_rate = pump.carrier_rate

    def drive_magnitude(self, t):
        return 0.0


def _thermal_diagonal(n, occ):
    p = np.ones(occ.shape[1])
    for m, nm in enumerate(n):
        k = occ[m]
        if nm <= 0:
            p = p * (k == 0)
        else:
            p = p * (nm**k / (1.0 + nm) ** (k + 1))
    return p


def msts_density_matrix(state, basis, cutoff, work_cutoff=None, strict=True):
    """Density matrix S rho_th S^dag of an MSTS on a truncated Fock space.

    S = exp(1/2 sum_ml (z*_ml b_m b_l - z_ml b_m^dag b_l^dag)) with
    z = U diag(r e^{i phi}) U^T, so that S^dag b S = cosh(r) b - e^{i phi}
    sinh(r) b^dag for a single mode.  The exponential is taken on a larger
    space (``work_cutoff``) and then truncated and renormalized.
    """
    M = basis.M
    if M > 2:
        raise ResourceGuard(f"the Fock representation handles at most 2 modes, got {M}")
    _guard(M, cutoff)
    if work_cutoff is None:
        work_cutoff = max(2 * cutoff, cutoff + 30) if M == 1 else cutoff + 15
    ops = build_operators(M, work_cutoff, max_dim=max(MAX_DIM, (work_cutoff + 1) ** M))
    occ = _occupations(M, work_cutoff)
    z = squeezing_matrix_z(basis, state.r, state.phi)
    K = _pair_operator(z, ops)
    S = expm(0.5 * (K.conj().T - K))
    rho_w = (S * _thermal_diagonal(state.n, occ)) @ S.conj().T
    keep = np.all(occ <= cutoff, axis=0)
    rho = rho_w[np.ix_(keep, keep)]
    rho = rho / np.real(np.trace(rho))
    rho = 0.5 * (rho + rho.conj().T)
    top = _top_layer_population(rho, _occupations(M, cutoff), cutoff)
    if strict and top > SATURATION_THRESHOLD:
        raise CutoffSaturation(top)
    return rho


def fidelity(rho, sigma):
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    w, V = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    sq = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    inner = sq @ (0.5 * (sigma + sigma.conj().T)) @ sq
    ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2)


@dataclass
class MomentTrajectory:
    t: np.ndarray
    number: np.ndarray
    pair: np.ndarray
    stats: dict = field(default_factory=dict)


def moment_ode_oracle(model, basis, pump, t_end, rtol=1e-10, atol=1e-13, t_eval=None, n_samples=101, method="DOP853"):
    """Integrate the closed equations for N = <b^dag b> and A = <b b>.

    In the rotating frame, with K = diag(i (omega - nu/2) + gamma), drive
    magnitude a(t) and physical coupling G,

        dN/dt = -K* N - N K + 2i a (G* A - A* G)
        dA/dt = -K A - A K - 2i a (G N + (1 + N^T) G).

    G is the conjugate of the MSTS coupling and the results are conjugated
    back, as explained in the module docstring.
    """
    M = basis.M
    if model.M != M:
        raise DimensionMismatch("model and basis disagree on the number of modes")
    nu = pump.carrier_rate
    G = _coupling_rates(_conjugate_basis(basis))
    Gc = G.conj()
    Kd = 1j * (np.asarray(model.structure.omega) - 0.5 * nu) + np.asarray(model.structure.gamma)
    I = np.eye(M)
    n2 = M * M

    def f(t, y):
        N = y[:n2].reshape(M, M)
        A = y[n2:].reshape(M, M)
        a = pump.drive_magnitude(t)
        dN = -(Kd.conj()[:, None] + Kd[None, :]) * N + 2j * a * (Gc @ A - A.conj() @ G)
        dA = -(Kd[:, None] + Kd[None, :]) * A - 2j * a * (G @ N + (I + N.T) @ G)
        return np.concatenate([dN.ravel(), dA.ravel()])

    ts = np.linspace(0.0, t_end, n_samples) if t_eval is None else np.asarray(t_eval, dtype=float)
    sol = solve_ivp(f, (0.0, t_end), np.zeros(2 * n2, complex), method=method, rtol=rtol, atol=atol, t_eval=ts)
    if sol.status != 0:
        raise StepSizeUnderflow(f"moment integration failed: {sol.message}")
    N = sol.y[:n2].T.reshape(-1, M, M).conj()
    A = (sol.y[n2:].T.reshape(-1, M, M) * np.exp(-1j * nu * sol.t)[:, None, None]).conj()
    return MomentTrajectory(sol.t, N, A, {"nfev": int(sol.nfev)})
