"""Near a solitary wave the action Hessian inherits the solitary slope sign.

For long waves the negative signature of Hess Theta is fixed by the sign of
the solitary index vk: two negative directions when vk > 0 and three when
vk < 0.  The defocusing model only produces the first case.  A shallow
quartic well produces the second.

    python docs/examples/large_period_signature.py
"""

from wavestab import make_model
from wavestab.action import action_hessian
from wavestab.asymptotics import large_period_wave_params, vk_index
from wavestab.modulation import coperiodic_criterion

cases = [
    ("defocusing cubic", make_model([1], [0, 0, 1 / 8]), 0.0, 1e-3),
    # the well is only about 5e-5 deep, so 1e-2 is already far out
    ("shallow quartic", make_model([1], [0, 0, 1 / 8, -0.02], alpha_max=20), -1.0, 1e-2),
]

for name, model, c, eps in cases:
    vk = vk_index(model, c, 1.0, 0.5)
    params = large_period_wave_params(model, c, 1.0, 0.5, eps)
    H = action_hessian(model, params, method="auto").hess
    result = coperiodic_criterion(H)
    print(f"{name:18s} vk = {vk:+.4f}  signature = {result['negative_signature']}  "
          f"co-periodic verdict = {result['verdict']}")
