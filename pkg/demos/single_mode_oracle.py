"""One lossy cavity checked against a brute-force master equation.

The squeezed thermal description needs three real numbers per mode.  Here
the same cavity is also simulated in a 61-level Fock space, and the
density matrices are compared sample by sample.
"""

# %%
import warnings

import numpy as np

from msts import CouplingSpec, PumpModel, QuasimodeSet, integrate, schmidt_basis, second_moments, validate
from msts.oracle import FockConfig, evolve_fock, fidelity, msts_density_matrix

with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # Q = 10: far from a real device, fine for a check
    model = validate(QuasimodeSet([1.0], [0.05]), CouplingSpec.from_matrix([[0.25]]))
basis = schmidt_basis(model.coupling)
pump = PumpModel.cw(1.0, 1.0)

ts = np.linspace(0.0, 2.3, 11)
traj = integrate(model, basis, pump, t_end=ts[-1], t_eval=ts)
fock = evolve_fock(FockConfig(model, basis, pump, 60), ts[-1], t_eval=ts)

# %%
print(f"{'t':>5} {'r':>7} {'n':>7} {'<b^dag b>':>10} {'Fock':>10} {'1 - F':>9}")
for i, s in enumerate(traj.states()):
    mom = second_moments(s, basis)
    rho = msts_density_matrix(s, basis, 60)
    print(f"{s.t:5.2f} {s.r[0]:7.4f} {s.n[0]:7.4f} {mom.number[0, 0].real:10.6f} "
          f"{fock.number[i, 0, 0].real:10.6f} {1 - fidelity(rho, fock.rho[i]):9.1e}")

# %% [markdown]
# Without loss the state would stay pure (n = 0).  Loss turns some of the
# squeezed vacuum into thermal noise, and the thermal photon number n
# tracks it exactly.
