"""The action integral, its gradient and Hessian.

Parameters are always ordered ``(mu_x, c_x, omega_phi, mu_phi)``.  The
gradient is a quadrature of exact derivatives of the effective potential;
the Hessian is a Richardson-extrapolated central difference of that
gradient, because a second derivative under the integral sign is not
integrable at the turning points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import BoundaryTooClose, NoDualPoint, NoiseFloor, ZeroPeriodDerivative
from .model import ModelSpec
from .profile import WaveParams, Well, large_period_epsilon, rho_dual, well_polynomial

__all__ = [
    "ActionData",
    "action_value",
    "action_gradient",
    "action_hessian",
    "modulation_coordinates",
    "boundary_rates",
]

A0 = np.diag([1.0, 1.0, -1.0, -1.0])


@dataclass(frozen=True)
class ActionData:
    theta: float
    grad: np.ndarray
    hess: np.ndarray
    fd_step: np.ndarray
    est_error: np.ndarray
    asymmetry: float
    method: str = "fd"

    def negative_signature(self) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.hess) < 0))


def action_value(model: ModelSpec, params: WaveParams, seed=None) -> float:
    """``Theta = 2 int sqrt(mu_x - Wrho) sqrt(kappa(2 rho)/rho) drho`` over the well."""
    return Well(model, params, seed).action(check=True)


def action_gradient(model: ModelSpec, params: WaveParams, seed=None) -> np.ndarray:
    """Gradient of ``Theta`` in ``(mu_x, c_x, omega_phi, mu_phi)``."""
    return Well(model, params, seed).gradient()


def _pw_param_derivatives(model: ModelSpec, params: WaveParams, rho: float) -> np.ndarray:
    k = float(model.kappa_at(2 * rho))
    s = params.mu_phi - params.c_x * rho
    return np.array([4 * rho * k, 2 * rho * s, -4 * rho * rho * k, -2 * s])


def boundary_rates(model: ModelSpec, params: WaveParams, seed=None) -> tuple[float, np.ndarray]:
    """Smallest root gap of the well and the speed at which roots move per parameter.

    A step ``h_j`` is safe when ``h_j * rate_j`` is small against ``gap``.
    """
    well = Well(model, params, seed)
    c = well_polynomial(model, params)
    dc = P.polyder(c)
    roots = [well.a, well.b]
    gap = well.b - well.a
    try:
        d = rho_dual(model, params, seed)
        roots.append(d)
        gap = min(gap, abs(d - well.a), abs(d - well.b))
    except NoDualPoint:
        pass
    rates = np.zeros(4)
    for r in roots:
        rates = np.maximum(rates, np.abs(_pw_param_derivatives(model, params, r) / P.polyval(r, dc)))
    return gap, rates


def _default_steps(model, params, seed, rel_step: float) -> np.ndarray:
    gap, rates = boundary_rates(model, params, seed)
    scale = np.maximum(1.0, np.abs(params.as_array()))
    h = rel_step * scale
    safe = 0.01 * gap / np.maximum(rates, 1e-300)
    h = np.minimum(h, safe)
    # below this the shifted parameters are not resolved in double precision
    if np.any(h < 1e-12 * scale):
        raise BoundaryTooClose(
            "parameters too close to a regime boundary for finite differences",
            gap=gap,
            steps=h.tolist(),
        )
    return h


def action_hessian(
    model: ModelSpec,
    params: WaveParams,
    step: Optional[Sequence[float] | float] = None,
    seed=None,
    rel_step: float = 1e-4,
    noise_tol: float = 1e-2,
    method: str = "fd",
    near_solitary: float = 1e-2,
) -> ActionData:
    """Hessian of ``Theta``.

    ``method="fd"`` takes central differences of the gradient at ``h`` and
    ``h/2`` with Richardson extrapolation.  ``step`` may be a scalar or one
    step per parameter; by default it is ``rel_step * max(1, |p_j|)``, shrunk
    when a regime boundary is close.

    ``method="fixed_endpoint"`` differentiates the gradient integral in the
    substitution variable, where the turning points no longer move; its error
    estimate is the gap to a lower-order rule.  ``method="auto"`` uses it when
    the wave is within ``near_solitary`` of a solitary wave (there the
    Hessian grows like ``1/epsilon^2`` and differencing loses its small
    eigenvalues) and differences otherwise.  It also falls back to the
    fixed-endpoint rule when differencing cannot meet ``noise_tol``, which
    happens on shallow wells where the safe step is tiny.
    """
    if method not in ("fd", "fixed_endpoint", "auto"):
        raise ValueError(f"unknown Hessian method {method!r}")
    if method == "auto":
        try:
            eps = large_period_epsilon(model, params, seed)
        except NoDualPoint:
            eps = np.inf
        if eps < near_solitary:
            return _fixed_endpoint_hessian(model, params, seed)
        try:
            return action_hessian(model, params, step, seed, rel_step, noise_tol, "fd")
        except (NoiseFloor, BoundaryTooClose):
            return _fixed_endpoint_hessian(model, params, seed)
    if method == "fixed_endpoint":
        return _fixed_endpoint_hessian(model, params, seed)
    p0 = params.as_array()
    if step is None:
        h = _default_steps(model, params, seed, rel_step)
    else:
        h = np.broadcast_to(np.asarray(step, dtype=float), (4,)).copy()
        gap, rates = boundary_rates(model, params, seed)
        if np.any(2.0 * h * rates > gap):
            raise BoundaryTooClose("step crosses a regime boundary", gap=gap, steps=h.tolist())
    well0 = Well(model, params, seed)
    grad = well0.gradient()
    theta = well0.action(check=True)

    def g(p):
        return Well(model, WaveParams.from_array(p), seed).gradient()

    cols_h = np.empty((4, 4))
    cols_h2 = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h[j]
        cols_h[:, j] = (g(p0 + e) - g(p0 - e)) / (2 * h[j])
        cols_h2[:, j] = (g(p0 + e / 2) - g(p0 - e / 2)) / h[j]
    rich = (4.0 * cols_h2 - cols_h) / 3.0
    est = np.abs(rich - cols_h2)
    hmax = float(np.max(np.abs(rich)))
    asym = float(np.max(np.abs(rich - rich.T)) / hmax) if hmax else 0.0
    floor = np.maximum(np.abs(rich), 1e-6 * hmax)
    if np.any(est > noise_tol * floor):
        i, j = np.unravel_index(np.argmax(est / floor), est.shape)
        raise NoiseFloor(
            "Richardson error estimate above tolerance",
            entry=[int(i), int(j)],
            estimate=float(est[i, j]),
            value=float(rich[i, j]),
        )
    return ActionData(
        theta=theta,
        grad=grad,
        hess=0.5 * (rich + rich.T),
        fd_step=h,
        est_error=est,
        asymmetry=asym,
        method="fd",
    )


def _fixed_endpoint_hessian(model, params, seed) -> ActionData:
    well = Well(model, params, seed)
    hess = well.hessian(check=False)
    coarse = well.hessian(check=False, order=20)
    hmax = float(np.max(np.abs(hess)))
    asym = float(np.max(np.abs(hess - hess.T)) / hmax) if hmax else 0.0
    return ActionData(
        theta=well.action(check=True),
        grad=well.gradient(),
        hess=0.5 * (hess + hess.T),
        fd_step=np.zeros(4),
        est_error=np.abs(hess - coarse),
        asymmetry=asym,
        method="fixed_endpoint",
    )


def modulation_coordinates(
    model: ModelSpec, params: WaveParams, hess: Optional[np.ndarray] = None, seed=None
):
    """``(k_x, k_phi, q_bar, m_bar, jacobian)`` from the gradient of ``Theta``.

    ``k_x = 1/d_{mu_x} Theta`` and ``(1, q, m, k_phi) = A0 grad / d_{mu_x} Theta``.
    The Jacobian rows follow the returned order and differentiate in
    ``(mu_x, c_x, omega_phi, mu_phi)``.
    """
    grad = action_gradient(model, params, seed)
    if hess is None:
        hess = action_hessian(model, params, seed=seed).hess
    g0 = grad[0]
    if abs(g0) < 1e-300:
        raise ZeroPeriodDerivative("d Theta / d mu_x vanishes")
    ag = A0 @ grad
    ah = A0 @ hess
    k_x = 1.0 / g0
    ratio = ag / g0
    d_ratio = (ah * g0 - np.outer(ag, hess[0])) / g0**2
    jac = np.vstack([-hess[0] / g0**2, d_ratio[3], d_ratio[1], d_ratio[2]])
    return k_x, float(ratio[3]), float(ratio[1]), float(ratio[2]), jac
