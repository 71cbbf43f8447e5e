"""Takagi factorization G = U diag(lam) U^T of complex symmetric matrices.

The factorization is built from the SVD G = U S W^H.  With D = W^H U* one
has G = U S D U^T, and D is block diagonal over groups of equal singular
values.  Each block of D is a symmetric unitary matrix; its real and
imaginary parts are commuting real symmetric matrices, so a single real
orthogonal O diagonalizes the block, and U O is the Takagi basis there.
The phases are kept in ``lam`` rather than absorbed into U.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DimensionMismatch, ModelError, NotSymmetric, NotUnitary, SYMMETRY_RTOL

__all__ = [
    "NoConvergence",
    "SchmidtBasis",
    "takagi_factorize",
    "squeezing_matrix_z",
    "schmidt_basis",
]

DEGENERACY_RTOL = 1e-8

# mixing coefficients for the joint diagonalization of Re(D_b), Im(D_b)
_MIX = (0.6180339887498949, 1.4142135623730951, 2.718281828459045, 0.3183098861837907)


class NoConvergence(ModelError):
    pass


@dataclass(frozen=True)
class SchmidtBasis:
    """Schmidt modes: unitary ``U`` and values ``lam = lambda_abs * exp(1j*theta)``."""

    U: np.ndarray
    lambda_abs: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        U = np.array(self.U, dtype=complex)
        lam_abs = np.array(self.lambda_abs, dtype=float)
        theta = np.array(self.theta, dtype=float)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or lam_abs.shape != (U.shape[0],) or theta.shape != lam_abs.shape:
            raise DimensionMismatch("inconsistent Schmidt basis shapes")
        for a in (U, lam_abs, theta):
            a.setflags(write=False)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "lambda_abs", lam_abs)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_lambda(cls, U, lam):
        lam = np.asarray(lam, dtype=complex)
        return cls(U, np.abs(lam), _wrap(np.angle(lam)))

    @property
    def M(self):
        return self.U.shape[0]

    @property
    def lam(self):
        return self.lambda_abs * np.exp(1j * self.theta)

    def reconstruct(self):
        return (self.U * self.lam) @ self.U.T

    def scaled(self, c):
        """Same basis with |lambda| multiplied by ``c`` > 0."""
        return SchmidtBasis(self.U, self.lambda_abs * c, self.theta)


def _wrap(theta):
    # map to (-pi, pi]
    w = np.angle(np.exp(1j * np.asarray(theta, dtype=float)))
    return np.where(w <= -np.pi, w + 2 * np.pi, w)


def _degenerate_blocks(s, rtol):
    tol = rtol * s[0] if s.size else 0.0
    blocks, start = [], 0
    for i in range(1, s.size + 1):
        if i == s.size or s[i - 1] - s[i] > tol:
            blocks.append((start, i))
            start = i
    return blocks


def _symmetric_unitary_basis(D):
    """Real orthogonal O with O^T D O diagonal for symmetric unitary D."""
    k = D.shape[0]
    D = 0.5 * (D + D.T)
    A, B = D.real, D.imag
    best, best_err = None, np.inf
    for c in _MIX:
        _, O = np.linalg.eigh(A + c * B)
        T = O.T @ D @ O
        err = np.linalg.norm(T - np.diag(np.diag(T)))
        if err < best_err:
            best, best_err = O, err
        if err <= 1e-12 * np.sqrt(k):
            break
    return best


def takagi_factorize(G, rtol=DEGENERACY_RTOL, check_symmetry=True):
    """Factor a complex symmetric matrix as ``U @ diag(lam) @ U.T``.

    Parameters
    ----------
    G : array_like, shape (M, M)
        Complex symmetric matrix.
    rtol : float
        Singular values closer than ``rtol * max(s)`` are treated as one
        degenerate block.

    Returns
    -------
    SchmidtBasis
        ``lambda_abs`` sorted in descending order (stable with respect to
        the SVD ordering), phases in ``theta``.
    """
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {G.shape}")
    norm = np.linalg.norm(G)
    if check_symmetry:
        asym = np.linalg.norm(G - G.T)
        bound = max(SYMMETRY_RTOL * norm, 1e-300)
        if asym > bound:
            raise NotSymmetric(asym, bound)
    M = G.shape[0]
    if norm == 0:
        return SchmidtBasis(np.eye(M), np.zeros(M), np.zeros(M))
    try:
        U, s, Wh = np.linalg.svd(G)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc

    D = Wh @ U.conj()
    tiny = s[0] * M * np.finfo(float).eps
    for a, b in _degenerate_blocks(s, rtol):
        if b - a == 1 or s[a] <= tiny:
            continue
        O = _symmetric_unitary_basis(D[a:b, a:b])
        U[:, a:b] = U[:, a:b] @ O

    lam = np.einsum("mu,mn,nu->u", U.conj(), G, U.conj())
    order = np.argsort(-s, kind="stable")
    U, lam = U[:, order], lam[order]
    return SchmidtBasis(U, np.abs(lam), _wrap(np.angle(lam)))


def schmidt_basis(coupling, unitarity_tol=1e-10):
    """Schmidt basis of a :class:`~msts.model.CouplingSpec` in rate units."""
    if coupling.kind == "matrix":
        basis = takagi_factorize(coupling.matrix)
    else:
        U = np.asarray(coupling.U)
        dev = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
        if dev > unitarity_tol:
            raise NotUnitary(dev, unitarity_tol)
        lam = np.asarray(coupling.lam)
        order = np.argsort(-np.abs(lam), kind="stable")
        basis = SchmidtBasis.from_lambda(U[:, order], lam[order])
    return basis.scaled(coupling.scale)


def squeezing_matrix_z(basis, r, phi):
    """Squeezing matrix ``z = U diag(r exp(1j*phi)) U^T``."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if r.shape != (basis.M,) or phi.shape != (basis.M,):
        raise DimensionMismatch(
            f"r and phi must have shape ({basis.M},), got {r.shape} and {phi.shape}"
        )
    z = (basis.U * (r * np.exp(1j * phi))) @ basis.U.T
    return 0.5 * (z + z.T)
