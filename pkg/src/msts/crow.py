"""Four-cavity coupled-resonator waveguide with periodic boundaries.

Bloch modes follow the tight-binding dispersion

    w_k = w0 (1 - beta1 cos kD),

and spontaneous four-wave mixing from a pump in the Bloch mode ``k_p``
couples signal/idler pairs through

    G_{k1 k2} = G0 exp(-i dk D / 2) sinc(M dk D / 2) / sinc(dk D / 2),

with dk = k1 + k2 - 2 k_p.  All rates are SI (rad/s) and times are in
seconds; ``t_c`` is the usual unit for reporting.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .model import CouplingSpec, ModelError, PumpModel, QuasimodeSet, validate
from .takagi import SchmidtBasis, schmidt_basis, takagi_factorize

__all__ = [
    "SPEED_OF_LIGHT",
    "PumpModeNotOnGrid",
    "CrowParams",
    "silicon_crow",
    "bloch_phases",
    "build_crow",
    "dirichlet_ratio",
    "crow_coupling",
    "table_coupling",
    "drive_parameters",
    "crow_pump",
    "crow_setup",
    "TABLE_LAMBDA",
]

SPEED_OF_LIGHT = 2.998e8

# tabulated Schmidt values |lambda_mu| of the silicon ring, in units of G0
TABLE_LAMBDA = np.array([1.21, 1.16, 0.742, 0.665])


class PumpModeNotOnGrid(ModelError):
    pass


@dataclass(frozen=True)
class CrowParams:
    """Parameters of a ring of ``M_cav`` coupled cavities.

    ``omega0_re``/``omega0_im`` and ``beta1_re``/``beta1_im`` give the
    complex single-cavity frequency (rad/s) and nearest-neighbour coupling.
    ``kpD`` is the pump Bloch phase k_p D.  ``g`` is the dimensionless pump
    strength 4 G0 |alpha|^2 t_c / hbar, which together with ``t_c`` and
    ``alpha_sq`` fixes G0.  ``N`` is kept only as an opaque label for the
    (2N+1) factor in G0.  ``sinc`` picks the sinc convention of the
    coupling formula: ``"unnormalized"`` for sin(x)/x, ``"normalized"`` for
    sin(pi x)/(pi x).
    """

    M_cav: int = 4
    d: float = 480e-9
    omega0_re: float = 0.305 * 2 * np.pi * SPEED_OF_LIGHT / 480e-9
    omega0_im: float = -7.71e-6 * 2 * np.pi * SPEED_OF_LIGHT / 480e-9
    beta1_re: float = 9.87e-3
    beta1_im: float = -1.97e-5
    kpD: float = np.pi / 2
    omega_p: float = 0.305 * 2 * np.pi * SPEED_OF_LIGHT / 480e-9
    g: float = 1 / 12
    t_c: float = 0.25e-12
    alpha_sq: float = 4.6e7
    N: int = 0
    sinc: str = "unnormalized"

    def __post_init__(self):
        if int(self.M_cav) != self.M_cav or self.M_cav < 2:
            raise ModelError("M_cav must be an integer >= 2")
        if self.sinc not in ("unnormalized", "normalized"):
            raise ModelError(f"unknown sinc convention {self.sinc!r}")
        if self.omega0_im > 0:
            raise ModelError("Im(omega0) must be <= 0 (decaying cavity)")
        for name in ("d", "t_c", "alpha_sq"):
            if not getattr(self, name) > 0:
                raise ModelError(f"{name} must be positive")

    @property
    def D(self):
        return 2.0 * self.d

    @property
    def k_p(self):
        return self.kpD / self.D

    @property
    def omega0(self):
        return complex(self.omega0_re, self.omega0_im)

    @property
    def beta1(self):
        return complex(self.beta1_re, self.beta1_im)

    @property
    def gamma0(self):
        return -self.omega0_im

    @property
    def Q0(self):
        return self.omega0_re / (2 * self.gamma0)

    @property
    def frequency_unit(self):
        """2 pi c / d, the unit of the tabulated frequencies."""
        return 2 * np.pi * SPEED_OF_LIGHT / self.d

    @property
    def G0_rate(self):
        """G0 / hbar in rad/s implied by g, t_c and alpha_sq."""
        return self.g / (4.0 * self.alpha_sq * self.t_c)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def with_(self, **changes):
        return replace(self, **changes)


def silicon_crow(**changes):
    """The four-cavity silicon example with g = 1/12 and t_c = 0.25 ps."""
    return CrowParams(**changes)


def bloch_phases(M_cav):
    """Allowed kD = 2 pi j / M mapped into (-pi, pi], in ascending order."""
    k = 2 * np.pi * np.arange(M_cav) / M_cav
    k = np.where(k > np.pi + 1e-12, k - 2 * np.pi, k)
    return np.sort(k)


def _kd_label(kd):
    frac = kd / np.pi
    for num, den in ((0, 1), (1, 1), (-1, 1), (1, 2), (-1, 2), (1, 3), (-1, 3), (2, 3), (-2, 3), (1, 4), (-1, 4), (3, 4), (-3, 4)):
        if abs(frac - num / den) < 1e-12:
            if num == 0:
                return "0"
            s = "-" if num < 0 else ""
            n = abs(num)
            top = "pi" if n == 1 else f"{n}pi"
            return f"{s}{top}" if den == 1 else f"{s}{top}/{den}"
    return f"{kd:.6g}"


def build_crow(params):
    """Bloch-mode quasimodes of the ring, one per allowed kD."""
    kd = bloch_phases(params.M_cav)
    w = params.omega0 * (1 - params.beta1 * np.cos(kd))
    labels = [f"kD={_kd_label(x)}" for x in kd]
    return QuasimodeSet(w.real, -w.imag, labels)


def dirichlet_ratio(x, M, tol=1e-9):
    """sin(M x) / (M sin x), with the limit cos(M x)/cos(x) where sin x = 0."""
    x = np.asarray(x, dtype=float)
    s = np.sin(x)
    out = np.empty_like(x)
    small = np.abs(s) < tol
    out[~small] = np.sin(M * x[~small]) / (M * s[~small])
    out[small] = np.cos(M * x[small]) / np.cos(x[small])
    return out


def crow_coupling(params, scale=None):
    """Coupling matrix over the Bloch modes in units of G0.

    With the unnormalized sinc the ratio is the Dirichlet kernel of
    dk D / 2 and vanishes except on phase-matched pairs for the four-cavity
    ring; the normalized sinc evaluates the same kernel at pi dk D / 2.
    ``scale`` defaults to ``params.G0_rate``.
    """
    kd = bloch_phases(params.M_cav)
    if not np.any(np.isclose(kd, np.angle(np.exp(1j * params.kpD)), atol=1e-12)):
        raise PumpModeNotOnGrid(f"k_p D = {params.kpD} is not an allowed Bloch phase")
    dk = kd[:, None] + kd[None, :] - 2 * params.kpD
    x = dk / 2
    if params.sinc == "normalized":
        x = np.pi * x
    G = np.exp(-0.5j * dk) * dirichlet_ratio(x, params.M_cav)
    G = 0.5 * (G + G.T)
    return CouplingSpec.from_matrix(G, scale=params.G0_rate if scale is None else scale)


def table_coupling(params=None):
    """Schmidt-form coupling with the tabulated |lambda| values.

    The unitary and the phases theta_mu come from the factorization of the
    normalized-sinc coupling matrix, which reproduces both columns of the
    tabulated Schmidt table.
    """
    params = silicon_crow() if params is None else params
    if params.M_cav != 4:
        raise ModelError("the tabulated Schmidt values exist only for M_cav = 4")
    ref = takagi_factorize(crow_coupling(params.with_(sinc="normalized")).matrix)
    lam = TABLE_LAMBDA * np.exp(1j * ref.theta)
    return CouplingSpec.from_schmidt(ref.U, lam, scale=params.G0_rate)


def drive_parameters(params, alpha_sq, v, G0=None, length=None):
    """Pump strength g and time unit t_c for a given pump and group velocity.

    t_c = L / v, where ``length`` defaults to (M_cav - 1) D, the distance
    from the first to the last cavity.  ``G0`` is the coupling energy in
    units of hbar * rad/s; it defaults to the value implied by ``params``.
    Returns ``(g, t_c)`` with g = 4 G0 |alpha|^2 t_c / hbar.
    """
    if not (alpha_sq > 0 and v > 0):
        raise ModelError("alpha_sq and v must be positive")
    L = (params.M_cav - 1) * params.D if length is None else length
    t_c = L / v
    G0 = params.G0_rate if G0 is None else G0
    return 4.0 * G0 * alpha_sq * t_c, t_c


def crow_pump(params):
    return PumpModel.cw(params.omega_p, params.alpha_sq)


def crow_setup(params=None, coupling="table"):
    """Validated model, Schmidt basis and pump for a CROW run.

    ``coupling`` is ``"table"`` (tabulated Schmidt values) or
    ``"analytic"`` (the coupling formula with ``params.sinc``).
    """
    params = silicon_crow() if params is None else params
    structure = build_crow(params)
    if coupling == "table":
        spec = table_coupling(params)
    elif coupling == "analytic":
        spec = crow_coupling(params)
    else:
        raise ModelError(f"unknown CROW coupling source {coupling!r}")
    model = validate(structure, spec)
    return model, schmidt_basis(spec), crow_pump(params)
