"""Squeezing and thermal photons in a four-cavity CROW.

Run with ``python demos/crow_dynamics.py``.  Prints the time evolution of
the Schmidt-mode squeezing amplitudes, the thermal photon numbers of the
Bloch modes and the best correlation variance between the two modes
that are phase matched with the pump.
"""

# %%
import numpy as np

from msts import integrate, optimize_angles, photon_numbers, second_moments
from msts.crow import TABLE_LAMBDA, crow_setup, silicon_crow

params = silicon_crow()
model, basis, pump = crow_setup(params)
print("Bloch modes:", ", ".join(model.structure.labels))
print(f"Q0 = {params.Q0:.0f}, t_c = {params.t_c * 1e12:.2f} ps, g = {params.g:.4f}")

# %% [markdown]
# The run covers 150 t_c.  The Schmidt amplitudes start out growing at
# g |lambda_mu| / 2 per t_c and then oscillate because the Schmidt modes
# are not eigenmodes of the linear Hamiltonian.

# %%
t_c = params.t_c
traj = integrate(model, basis, pump, t_end=150 * t_c, output_stride=0.5 * t_c)
t = traj.t / t_c
print("initial slopes (1/t_c):", np.round((traj.r[1] - traj.r[0]) / (t[1] - t[0]), 5))
print("expected g|lambda|/2:  ", np.round(params.g * TABLE_LAMBDA / 2, 5))

# %%
pair = (model.structure.labels.index("kD=0"), model.structure.labels.index("kD=pi"))
print(f"\n{'t/t_c':>6} {'r_1':>7} {'r_4':>7} {'N(-pi/2)':>9} {'max n':>7} {'photons':>9} {'Delta2':>7}")
for i in range(0, len(traj), 20):
    mom = second_moments(traj.state(i), basis)
    per_mode, total = photon_numbers(mom)
    d2 = optimize_angles(mom, pair)[2]
    print(f"{t[i]:6.0f} {traj.r[i, 0]:7.3f} {traj.r[i, 3]:7.3f} {per_mode[0]:9.4f} "
          f"{traj.n[i].max():7.3f} {total:9.2f} {d2:7.3f}")

# %% [markdown]
# The backward mode kD = -pi/2 is only weakly populated: pairs are
# generated mainly into kD = 0 and kD = pi (and into the pump mode).
# Correlation variances below 1 mark inseparable states.

# %%
print(f"\nmax |trace residual| / scale = {np.abs(traj.scaled_trace_residual).max():.1e}")
