"""Quasimodes, nonlinear coupling and classical pump.

Everything is expressed with hbar = 1, so energies are angular rates.  A
coupling matrix may be given in any convenient unit; ``CouplingSpec.scale``
converts it to rad per unit time once, when the Schmidt basis is built.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelError",
    "DimensionMismatch",
    "NotSymmetric",
    "NotUnitary",
    "LowQualityFactorWarning",
    "QuasimodeSet",
    "CouplingSpec",
    "PumpModel",
    "Model",
    "pump_amplitude_squared",
    "validate",
]

SYMMETRY_RTOL = 1e-12
UNITARITY_TOL = 1e-10
Q_WARNING_THRESHOLD = 1e3


class ModelError(ValueError):
    """Base class for invalid model input."""


class DimensionMismatch(ModelError):
    pass


class NotSymmetric(ModelError):
    def __init__(self, asymmetry, bound):
        super().__init__(
            f"coupling matrix is not symmetric: ||G - G^T||_F = {asymmetry:.3e} > {bound:.3e}"
        )
        self.asymmetry = asymmetry
        self.bound = bound


class NotUnitary(ModelError):
    def __init__(self, deviation, bound):
        super().__init__(
            f"Schmidt matrix is not unitary: ||U^H U - I||_F = {deviation:.3e} > {bound:.3e}"
        )
        self.deviation = deviation
        self.bound = bound


class LowQualityFactorWarning(UserWarning):
    """A quasimode has Q = omega / (2 gamma) below the weak-loss regime."""


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuasimodeSet:
    """Complex quasimode frequencies ``omega - 1j * gamma``.

    Parameters
    ----------
    omega : array_like, shape (M,)
        Real part of each quasimode frequency.
    gamma : array_like, shape (M,)
        Amplitude decay rate of each quasimode, non-negative.
    labels : sequence of str, optional
        Per-mode identifiers, e.g. the Bloch index.
    """

    omega: np.ndarray
    gamma: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        omega = _frozen(np.atleast_1d(self.omega))
        gamma = _frozen(np.atleast_1d(self.gamma))
        if omega.ndim != 1 or omega.size < 1:
            raise DimensionMismatch("omega must be a non-empty 1-D array")
        if gamma.shape != omega.shape:
            raise DimensionMismatch(
                f"gamma has shape {gamma.shape}, expected {omega.shape}"
            )
        if not np.all(np.isfinite(omega)) or not np.all(np.isfinite(gamma)):
            raise ModelError("quasimode frequencies must be finite")
        if np.any(gamma < 0):
            raise ModelError("decay rates gamma must be >= 0")
        labels = self.labels
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != omega.size:
                raise DimensionMismatch(
                    f"{len(labels)} labels given for {omega.size} modes"
                )
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "labels", labels)

    @property
    def M(self):
        return self.omega.size

    @property
    def lossless(self):
        return bool(np.all(self.gamma == 0))

    @property
    def complex_frequencies(self):
        return self.omega - 1j * self.gamma

    @property
    def quality_factors(self):
        with np.errstate(divide="ignore"):
            return np.where(self.gamma > 0, self.omega / (2 * self.gamma), np.inf)


@dataclass(frozen=True)
class CouplingSpec:
    """Nonlinear coupling, either as a symmetric matrix or in Schmidt form.

    Use :meth:`from_matrix` or :meth:`from_schmidt`.  ``scale`` multiplies
    the stored values to give rates (``G / hbar`` in rad per unit time).
    """

    matrix: np.ndarray | None = None
    U: np.ndarray | None = None
    lam: np.ndarray | None = None
    scale: float = 1.0

    def __post_init__(self):
        has_matrix = self.matrix is not None
        has_schmidt = self.U is not None or self.lam is not None
        if has_matrix == has_schmidt:
            raise ModelError("give exactly one of `matrix` or (`U`, `lam`)")
        if has_matrix:
            G = _frozen(np.atleast_2d(self.matrix), complex)
            if G.ndim != 2 or G.shape[0] != G.shape[1]:
                raise DimensionMismatch(f"coupling matrix must be square, got {G.shape}")
            object.__setattr__(self, "matrix", G)
        else:
            if self.U is None or self.lam is None:
                raise ModelError("Schmidt coupling needs both `U` and `lam`")
            U = _frozen(np.atleast_2d(self.U), complex)
            lam = _frozen(np.atleast_1d(self.lam), complex)
            if U.ndim != 2 or U.shape[0] != U.shape[1] or lam.shape != (U.shape[0],):
                raise DimensionMismatch(
                    f"U has shape {U.shape} but lambda has shape {lam.shape}"
                )
            object.__setattr__(self, "U", U)
            object.__setattr__(self, "lam", lam)
        scale = float(self.scale)
        if not np.isfinite(scale) or scale <= 0:
            raise ModelError("coupling scale must be a positive finite number")
        object.__setattr__(self, "scale", scale)

    @classmethod
    def from_matrix(cls, G, scale=1.0):
        return cls(matrix=G, scale=scale)

    @classmethod
    def from_schmidt(cls, U, lam, scale=1.0):
        return cls(U=U, lam=lam, scale=scale)

    @property
    def kind(self):
        return "matrix" if self.matrix is not None else "schmidt"

    @property
    def M(self):
        return (self.matrix if self.matrix is not None else self.U).shape[0]

    def dense(self):
        """The coupling matrix G in its stored units."""
        if self.matrix is not None:
            return np.array(self.matrix)
        return (self.U * self.lam) @ self.U.T


_PUMP_KINDS = ("cw", "decaying", "envelope")
_PROCESSES = ("sfwm", "spdc")


@dataclass(frozen=True)
class PumpModel:
    """Classical, undepleted pump with carrier ``omega_p``.

    ``alpha_sq`` is the mean pump photon number |alpha|^2 (the initial value
    for the ``decaying`` kind).  For the ``envelope`` kind, ``times`` and
    ``samples`` tabulate |alpha(t)|^2, interpolated linearly and held
    constant outside the table.

    ``process`` selects how the pump enters the generator: ``"sfwm"`` uses
    alpha(t)^2, ``"spdc"`` uses alpha(t) itself.
    """

    kind: str
    omega_p: float
    alpha_sq: float = 0.0
    gamma_p: float = 0.0
    times: np.ndarray | None = None
    samples: np.ndarray | None = None
    process: str = "sfwm"

    def __post_init__(self):
        if self.kind not in _PUMP_KINDS:
            raise ModelError(f"unknown pump kind {self.kind!r}; expected one of {_PUMP_KINDS}")
        if self.process not in _PROCESSES:
            raise ModelError(f"unknown process {self.process!r}; expected one of {_PROCESSES}")
        if not np.isfinite(self.omega_p):
            raise ModelError("omega_p must be finite")
        object.__setattr__(self, "omega_p", float(self.omega_p))
        if self.kind == "envelope":
            if self.times is None or self.samples is None:
                raise ModelError("envelope pump needs `times` and `samples`")
            times = _frozen(self.times)
            samples = _frozen(self.samples)
            if times.ndim != 1 or times.shape != samples.shape or times.size < 2:
                raise DimensionMismatch("envelope times and samples must be equal-length 1-D arrays")
            if np.any(np.diff(times) <= 0):
                raise ModelError("envelope times must be strictly increasing")
            if np.any(samples < 0):
                raise ModelError("envelope samples |alpha(t)|^2 must be >= 0")
            object.__setattr__(self, "times", times)
            object.__setattr__(self, "samples", samples)
        else:
            if self.alpha_sq < 0:
                raise ModelError("alpha_sq must be >= 0")
            if self.kind == "decaying" and self.gamma_p < 0:
                raise ModelError("gamma_p must be >= 0")
            object.__setattr__(self, "alpha_sq", float(self.alpha_sq))
            object.__setattr__(self, "gamma_p", float(self.gamma_p))

    @classmethod
    def cw(cls, omega_p, alpha_sq, process="sfwm"):
        return cls("cw", omega_p, alpha_sq=alpha_sq, process=process)

    @classmethod
    def decaying(cls, omega_p, gamma_p, alpha_sq0, process="sfwm"):
        return cls("decaying", omega_p, alpha_sq=alpha_sq0, gamma_p=gamma_p, process=process)

    @classmethod
    def envelope(cls, omega_p, times, samples, process="sfwm"):
        return cls("envelope", omega_p, times=times, samples=samples, process=process)

    def photon_number(self, t):
        """Mean pump photon number |alpha(t)|^2."""
        if self.kind == "cw":
            return self.alpha_sq + 0.0 * np.asarray(t, dtype=float)
        if self.kind == "decaying":
            return self.alpha_sq * np.exp(-2.0 * self.gamma_p * np.asarray(t, dtype=float))
        return np.interp(t, self.times, self.samples)

    @property
    def carrier_rate(self):
        """Angular rate of the drive factor: 2 omega_p for SFWM, omega_p for SPDC."""
        return 2.0 * self.omega_p if self.process == "sfwm" else self.omega_p

    def drive_magnitude(self, t):
        """|alpha(t)|^2 for SFWM, |alpha(t)| for SPDC."""
        n = self.photon_number(t)
        return n if self.process == "sfwm" else np.sqrt(n)

    def drive(self, t):
        """Complex drive factor with carrier exp(-i nu t), nu = carrier_rate."""
        return self.drive_magnitude(t) * np.exp(-1j * self.carrier_rate * np.asarray(t, dtype=float))

    def integrated_drive(self, t, t_i=0.0):
        """Integral of drive_magnitude from t_i to t."""
        if self.kind == "cw":
            a = self.alpha_sq if self.process == "sfwm" else np.sqrt(self.alpha_sq)
            return a * (t - t_i)
        if self.kind == "decaying":
            a0 = self.alpha_sq if self.process == "sfwm" else np.sqrt(self.alpha_sq)
            rate = 2.0 * self.gamma_p if self.process == "sfwm" else self.gamma_p
            if rate == 0:
                return a0 * (t - t_i)
            return a0 * (np.exp(-rate * t_i) - np.exp(-rate * t)) / rate
        return _envelope_integral(self, t) - _envelope_integral(self, t_i)


def _envelope_integral(pump, t):
    # exact for the piecewise-linear |alpha|^2; SPDC integrates sqrt of it
    from scipy.integrate import quad

    knots = np.concatenate([[min(0.0, pump.times[0])], pump.times])
    knots = knots[knots < t]
    edges = np.append(knots, t)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if pump.process == "sfwm":
            total += 0.5 * (b - a) * (pump.photon_number(a) + pump.photon_number(b))
        else:
            total += quad(lambda s: np.sqrt(pump.photon_number(s)), a, b)[0]
    return total


def pump_amplitude_squared(pump, t):
    """alpha(t)^2 = |alpha(t)|^2 exp(-2i omega_p t)."""
    return complex(pump.photon_number(t) * np.exp(-2j * pump.omega_p * t))


@dataclass(frozen=True)
class Model:
    """A validated structure together with its coupling."""

    structure: QuasimodeSet
    coupling: CouplingSpec
    warnings: tuple = field(default=())

    @property
    def M(self):
        return self.structure.M


def validate(structure, coupling):
    """Check that a structure and coupling fit together.

    Returns a :class:`Model`.  Raises :class:`DimensionMismatch`,
    :class:`NotSymmetric` or :class:`NotUnitary`; emits
    :class:`LowQualityFactorWarning` for modes with Q < 1e3.
    """
    if coupling.M != structure.M:
        raise DimensionMismatch(
            f"coupling is {coupling.M}x{coupling.M} but there are {structure.M} quasimodes"
        )
    if coupling.kind == "matrix":
        G = coupling.matrix
        asym = np.linalg.norm(G - G.T)
        bound = SYMMETRY_RTOL * np.linalg.norm(G)
        if asym > bound:
            raise NotSymmetric(asym, bound)
    else:
        U = coupling.U
        dev = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
        if dev > UNITARITY_TOL:
            raise NotUnitary(dev, UNITARITY_TOL)
    notes = []
    low_q = np.flatnonzero(structure.quality_factors < Q_WARNING_THRESHOLD)
    if low_q.size:
        msg = f"quasimodes {low_q.tolist()} have Q < {Q_WARNING_THRESHOLD:g}; weak-loss assumption is questionable"
        warnings.warn(msg, LowQualityFactorWarning, stacklevel=2)
        notes.append(msg)
    return Model(structure, coupling, tuple(notes))
