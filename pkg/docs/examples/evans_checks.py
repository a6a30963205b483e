"""Two sanity checks every Evans computation should pass.

First, a constant state of the free model has a closed-form Evans function.
Second, for a genuine wave the Evans function vanishes to fourth order at the
origin, with leading coefficient det Hess Theta.

    python docs/examples/evans_checks.py
"""

import math

import numpy as np

from wavestab import WaveParams, make_model, solve_profile
from wavestab.action import action_hessian
from wavestab.spectral import ConstantProfile, evans, evans_batch

free = make_model([1], [0])
prof = ConstantProfile.for_model(free, 1.0, 0.0, math.pi)
for eta in (0.5, 1.0, 2.0):
    D = evans(free, prof, 0.0, 0.0, eta**2)
    exact = (math.exp(eta * math.pi) - 1) ** 2 * (math.exp(-eta * math.pi) - 1) ** 2
    print(f"|eta| = {eta}: D = {D.real:.10g}, closed form = {exact:.10g}")

model = make_model([1], [0, 0, -1 / 8])
params = WaveParams(-0.375, 0.0, -1.0, 0.0)
wave = solve_profile(model, params)
lams = np.geomspace(1e-2, 1e-1, 5)
ratio = (evans_batch(model, wave, 0.0, lams, 0.0, rtol=1e-13) / lams**4).real
print("D(lambda) / lambda^4:", np.array2string(ratio, precision=5))
print("det Hess Theta:     ", f"{np.linalg.det(action_hessian(model, params).hess):.5f}")
