"""Small waves of a focusing model lose stability to long-wave modulations.

We build a nearly harmonic wave of the cubic focusing model, ask the
modulation equations for their characteristic speeds, and confirm the
prediction by counting Evans roots in a small box to the right of the
imaginary axis.

    python docs/examples/focusing_sideband.py
"""

import numpy as np

from wavestab import make_model, solve_profile
from wavestab.action import action_hessian
from wavestab.asymptotics import harmonic_point, harmonic_wave_params
from wavestab.modulation import characteristic_speeds
from wavestab.spectral import count_unstable

model = make_model([1], [0, 0, -1 / 8])

# The constant state rho = 1 at rest is the bottom of the well.  Its
# hyperbolicity index is negative, which already hints at trouble.
hp = harmonic_point(model, 0.0, 1.0, 0.0)
print(f"harmonic limit: X0 = {hp.X0:.6f}, delta_hyp = {hp.delta_hyp:+.3f}")

# Lift the energy slightly above the bottom of the well.
params = harmonic_wave_params(model, 0.0, 1.0, 0.0, 1e-3)
profile = solve_profile(model, params)
print(f"wave: mu_x = {params.mu_x:.6f}, period = {profile.X_x:.6f}")

# Whitham side: complex speeds mean the modulation system is elliptic.
H = action_hessian(model, params).hess
speeds, hyperbolic, _ = characteristic_speeds(H, profile.k_x)
print("characteristic speeds:", np.array2string(speeds, precision=3))
print("hyperbolic:", hyperbolic)

# Spectral side: an eigenvalue with positive real part near the origin.
n = count_unstable(model, profile, 0.05, 0.0, (1e-4 - 0.05j, 0.05 + 0.05j))
print(f"Evans roots with Re > 1e-4 at xi = 0.05: {n}")
