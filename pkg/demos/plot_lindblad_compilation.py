"""
From a Lindblad equation to a noisy circuit
===========================================

A nearest-neighbour Hamiltonian with single-site jump operators is split into
brick layers of two-qubit gates and single-qubit channels.  The Kraus operators
of each channel come from the eigenvectors of the propagator's Choi matrix, so
no Trotter error enters inside a channel.  The remaining error is the first
order product-formula error, which this script measures against the exact
propagator.
"""

# %%
import numpy as np
import scipy.linalg

from unravel import jump_channel_kraus, named_kraus, trotterize
from unravel.lindblad import LOWERING, PROJ0, LindbladModel, dense_lindbladian, model_from_spec
from unravel.oracle import dense_evolve, product_density, trace_distance

# %%
# The two textbook jump operators give the familiar channels.
gamma, dt = 0.5, 0.2
deph = jump_channel_kraus(PROJ0, gamma, dt)
ad = jump_channel_kraus(LOWERING, gamma, dt)
ref_deph = named_kraus("dephasing", 1 - np.exp(-gamma * dt / 2))
ref_ad = named_kraus("amplitude_damping", 1 - np.exp(-gamma * dt))
print("dephasing deviation   :", max(np.abs(a - b).max() for a, b in zip(deph.ops, ref_deph.ops)))
print("damping deviation     :", max(np.abs(a - b).max() for a, b in zip(ad.ops, ref_ad.ops)))

# %%
# A small XX chain with transverse fields and decay on every site.
spec = {
    "n": 4,
    "terms": [{"pauli": "XX"}, {"pauli": "Z", "coef": 0.4}],
    "jumps": [{"op": "lowering", "gamma": 0.3}],
}
rho0 = product_density("0101")
print("\n    dt    one-step error")
for dt in (0.08, 0.04, 0.02, 0.01):
    model = model_from_spec(dict(spec, dt=dt))
    exact = (scipy.linalg.expm(dense_lindbladian(model) * dt) @ rho0.reshape(-1)).reshape(16, 16)
    err = trace_distance(dense_evolve(trotterize(model), rho0), exact)
    print(f"  {dt:5.2f}   {err:.3e}")
print("halving dt should cut the error by about four")
