"""Two degenerate cavities: inseparability under loss.

With equal couplings the two Schmidt modes share r and phi, and the best
correlation variance of a lossless run is exp(-2 r).  Loss slows the growth
of r and adds thermal noise, so the variance ends up above exp(-2 r).
"""

# %%
import warnings

import numpy as np

from msts import CouplingSpec, PumpModel, QuasimodeSet, integrate, optimize_angles, schmidt_basis, second_moments, validate
from msts.limits import TWO_MODE_U

pump = PumpModel.cw(1.0, 1.0)
coupling = CouplingSpec.from_schmidt(TWO_MODE_U, [2e-3, 2e-3])

# %%
print(f"{'gamma_1':>8} {'gamma_2':>8} {'r':>7} {'Delta2':>8} {'exp(-2r)':>9}")
for g1, g2 in ((0.0, 0.0), (1e-3, 1e-3), (1e-3, 4e-3), (0.0, 8e-3)):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # Q of a few hundred keeps the run short
        model = validate(QuasimodeSet([1.0, 1.0], [g1, g2]), coupling)
    basis = schmidt_basis(coupling)
    traj = integrate(model, basis, pump, t_end=300.0, n_samples=2)
    s = traj.state(-1)
    d2 = optimize_angles(second_moments(s, basis), (0, 1), "+")[2]
    print(f"{g1:8.0e} {g2:8.0e} {s.r[0]:7.3f} {d2:8.4f} {np.exp(-2 * s.r[0]):9.4f}")
