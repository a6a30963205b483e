"""Madelung transform between ``U`` and the hydrodynamic pair ``(rho, v)``.

``J = [[0, 1], [-1, 0]]`` and ``U = sqrt(2 rho) e^{theta J} e1``, so that
``U = sqrt(2 rho) (cos theta, -sin theta)`` and ``v = theta'``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import VanishingModulus
from .model import ModelSpec

__all__ = [
    "HydroState",
    "to_hydro",
    "from_hydro",
    "hydro_hamiltonian",
    "first_integral_residuals",
]


def _J(U: np.ndarray) -> np.ndarray:
    return np.stack([U[..., 1], -U[..., 0]], axis=-1)


@dataclass(frozen=True)
class HydroState:
    rho: np.ndarray
    v: np.ndarray
    x_grid: np.ndarray
    rho_x: Optional[np.ndarray] = None


def to_hydro(U, U_x, x_grid, floor: float = 1e-14) -> HydroState:
    """``rho = |U|^2 / 2`` and ``v = (J U . U_x / 2) / rho``.

    ``U`` and ``U_x`` have shape ``(n, 2)``.
    """
    U = np.asarray(U, dtype=float)
    U_x = np.asarray(U_x, dtype=float)
    mass = 0.5 * np.sum(U * U, axis=-1)
    if np.any(mass <= floor):
        i = int(np.argmin(mass))
        raise VanishingModulus("|U| vanishes on the grid", index=i, rho=float(mass[i]))
    q = 0.5 * np.sum(_J(U) * U_x, axis=-1)
    rho_x = np.sum(U * U_x, axis=-1)
    return HydroState(rho=mass, v=q / mass, x_grid=np.asarray(x_grid, dtype=float), rho_x=rho_x)


def from_hydro(state: HydroState, theta0: float = 0.0, with_derivative: bool = False):
    """``U = sqrt(2 rho) e^{theta J} e1`` with ``theta = theta0 + int_0^x v``.

    The phase is the antiderivative of a cubic spline of ``v``.  With
    ``with_derivative`` the pair ``(U, U_x)`` is returned; ``U_x`` uses
    ``state.rho_x`` when present and a spline derivative of ``rho`` otherwise.
    """
    x = state.x_grid
    anti = CubicSpline(x, state.v).antiderivative()
    theta = theta0 + anti(x) - anti(x[0])
    amp = np.sqrt(2.0 * state.rho)
    U = np.stack([amp * np.cos(theta), -amp * np.sin(theta)], axis=-1)
    if not with_derivative:
        return U
    rho_x = state.rho_x if state.rho_x is not None else CubicSpline(x, state.rho)(x, 1)
    U_x = (rho_x / (2.0 * state.rho))[:, None] * U + state.v[:, None] * _J(U)
    return U, U_x


def hydro_hamiltonian(model: ModelSpec, rho, v, rho_x) -> np.ndarray:
    """``H0 = kappa(2 rho) rho v^2 + kappa(2 rho) rho_x^2 / (4 rho) + W(2 rho)``."""
    rho = np.asarray(rho, dtype=float)
    k = model.kappa_at(2.0 * rho)
    return k * rho * v**2 + k * rho_x**2 / (4.0 * rho) + model.W_at(2.0 * rho)


def first_integral_residuals(model: ModelSpec, profile) -> dict:
    """Pointwise residuals of the two first integrals, on both sides of the transform.

    U-side: ``mu_phi = kappa J V . V_x + c_x |V|^2 / 2`` and
    ``mu_x = kappa |V_x|^2 / 2 - W + omega_phi |V|^2 / 2``, with ``kappa`` at ``|V|^2``.
    Hydrodynamic side: ``mu_phi = d_v (H0 + c_x rho v)`` and
    ``mu_x = rho_x d_{rho_x} H_EK - H_EK`` where
    ``H_EK = H0 - omega_phi rho - mu_phi v + c_x rho v``.
    """
    p = profile.params
    V, Vx = np.asarray(profile.V), np.asarray(profile.Vx)
    a = np.sum(V * V, axis=-1)
    k = model.kappa_at(a)
    u_phi = k * np.sum(_J(V) * Vx, axis=-1) + 0.5 * p.c_x * a - p.mu_phi
    u_x = 0.5 * k * np.sum(Vx * Vx, axis=-1) - model.W_at(a) + 0.5 * p.omega_phi * a - p.mu_x

    h = to_hydro(V, Vx, profile.x_grid)
    rho, v, rx = h.rho, h.v, h.rho_x
    kh = model.kappa_at(2.0 * rho)
    h_phi = 2.0 * kh * rho * v + p.c_x * rho - p.mu_phi
    H_ek = hydro_hamiltonian(model, rho, v, rx) - p.omega_phi * rho - p.mu_phi * v + p.c_x * rho * v
    h_x = kh * rx**2 / (2.0 * rho) - H_ek - p.mu_x
    return {
        "u_side": (u_phi, u_x),
        "hydro_side": (h_phi, h_x),
        "max_mu_phi": float(max(np.max(np.abs(u_phi)), np.max(np.abs(h_phi)))),
        "max_mu_x": float(max(np.max(np.abs(u_x)), np.max(np.abs(h_x)))),
        "route_gap": float(
            max(np.max(np.abs(u_phi - h_phi)), np.max(np.abs(u_x - h_x)))
        ),
    }
