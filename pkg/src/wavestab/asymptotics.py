"""Small-amplitude and large-period limits.

Both limits are parametrized by ``(c_x, rho0, k_phi)``: a critical point
``rho0`` of the effective potential with phase velocity ``k_phi``.  A
minimum is a harmonic (small amplitude) limit, a maximum is the endstate of
a solitary wave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize

from .errors import NoSolitaryWave, NotAMinimum, NumericalError
from .model import ModelSpec
from .profile import (
    WaveParams,
    _positive_real_roots,
    effective_potential,
    large_period_epsilon,
    well_polynomial,
)

__all__ = [
    "HarmonicPoint",
    "SolitaryData",
    "critical_point_params",
    "harmonic_point",
    "delta_hyp",
    "delta_BF",
    "a0_index",
    "solitary_action",
    "vk_index",
    "constant_state_check",
    "harmonic_wave_params",
    "large_period_wave_params",
]


def critical_point_params(model: ModelSpec, c_x: float, rho0: float, k_phi0: float) -> WaveParams:
    """``(mu_x, c_x, omega_phi, mu_phi)`` making ``rho0`` a critical point with ``nu(rho0) = k_phi0``."""
    a = 2.0 * rho0
    k, k1 = float(model.kappa_at(a)), float(model.kappa_at(a, 1))
    mu_phi = c_x * rho0 + k * a * k_phi0
    omega = c_x * k_phi0 + (k1 * a + k) * k_phi0**2 + 2.0 * float(model.W_at(a, 1))
    mu_x = -0.5 * k * a * k_phi0**2 - float(model.W_at(a)) - c_x * rho0 * k_phi0 + omega * rho0 + mu_phi * k_phi0
    return WaveParams(mu_x, c_x, omega, mu_phi)


def _d2W(model, rho0, params, order=2):
    return float(effective_potential(model, rho0, params, order))


def delta_hyp(model: ModelSpec, rho0: float, k_phi0: float) -> float:
    a = 2.0 * rho0
    return float(model.W_at(a, 2) + (model.kappa_at(a, 2) * rho0 + model.kappa_at(a, 1)) * k_phi0**2)


def delta_BF(model: ModelSpec, c_x: float, rho0: float, k_phi0: float) -> float:
    """Benjamin-Feir index.

    The harmonic wavenumber enters only through
    ``L = (kappa/(4 rho)) (2 pi / X0)^2 = d2Wrho / 2``; that form is used so the
    value is defined on both sides of the small-amplitude condition.
    """
    params = critical_point_params(model, c_x, rho0, k_phi0)
    a = 2.0 * rho0
    k = float(model.kappa_at(a))
    r1 = float(model.kappa_at(a, 1)) / k
    r2 = float(model.kappa_at(a, 2)) / k
    q = 1.0 / a
    W2, W3, W4 = (float(model.W_at(a, j)) for j in (2, 3, 4))
    L = 0.5 * _d2W(model, rho0, params)
    t1 = L**3 * (-3 * r1**2 - 2 * r1 * q + r2)
    t2 = L**2 * (
        W2 * (-12 * r1**2 - 6 * r1 * q + 4 * q**2 + 3 * r2)
        + 4 * W3 * (r1 + 2 * q)
        + 2 * W4
    )
    t3 = L * (
        12 * W2**2 * (r1**2 + 4 * r1 * q + 3 * q**2)
        + 8 * W2 * W3 * (4 * r1 + 5 * q)
        + (4.0 / 3.0) * W3**2
        + 6 * W2 * W4
    )
    t4 = 8 * W2 * (W3 + 3 * W2 * (r1 + q)) ** 2
    return float(t1 + t2 + t3 + t4)


def a0_index(model: ModelSpec, c_x: float, rho0: float, k_phi0: float) -> float:
    """Co-periodic small-amplitude index, with ``kappa(2 rho)`` in every denominator."""
    params = critical_point_params(model, c_x, rho0, k_phi0)
    d2, d3, d4 = (_d2W(model, rho0, params, j) for j in (2, 3, 4))
    a = 2.0 * rho0
    k = float(model.kappa_at(a))
    k1, k2 = float(model.kappa_at(a, 1)), float(model.kappa_at(a, 2))
    inner = (
        (5.0 / 3.0) * d3**2
        - d2 * d4
        - 4 * d2 * d3 * (k1 / k - 1 / (2 * rho0))
        + 16 * d2**2 * (k2 / k - k1 / (k * 2 * rho0) + 1 / (2 * rho0**2))
    )
    return float(inner / (8 * d2**3))


@dataclass(frozen=True)
class HarmonicPoint:
    c_x: float
    rho0: float
    k_phi0: float
    omega_phi0: float
    mu_phi0: float
    mu_x0: float
    X0: float
    delta_hyp: float
    delta_BF: float
    a0: float

    @property
    def params(self) -> WaveParams:
        return WaveParams(self.mu_x0, self.c_x, self.omega_phi0, self.mu_phi0)


def harmonic_point(model: ModelSpec, c_x: float, rho0: float, k_phi0: float) -> HarmonicPoint:
    """Limit data of the small-amplitude family at ``(c_x, rho0, k_phi0)``."""
    if rho0 <= 0:
        raise NotAMinimum("rho0 must be positive", d2W=float("nan"))
    params = critical_point_params(model, c_x, rho0, k_phi0)
    d2 = _d2W(model, rho0, params)
    if d2 <= 0:
        raise NotAMinimum("rho0 is not a strict minimum of the effective potential", d2W=d2)
    k = float(model.kappa_at(2 * rho0))
    X0 = 2 * math.pi * math.sqrt(k / (2 * rho0 * d2))
    return HarmonicPoint(
        c_x=c_x,
        rho0=rho0,
        k_phi0=k_phi0,
        omega_phi0=params.omega_phi,
        mu_phi0=params.mu_phi,
        mu_x0=params.mu_x,
        X0=X0,
        delta_hyp=delta_hyp(model, rho0, k_phi0),
        delta_BF=delta_BF(model, c_x, rho0, k_phi0),
        a0=a0_index(model, c_x, rho0, k_phi0),
    )


# ---------------------------------------------------------------------------
# Solitary waves


@dataclass(frozen=True)
class SolitaryData:
    c_x: float
    rho_endstate: float
    k_phi: float
    rho_s: float
    theta_s: float
    d2_theta_s: Optional[float] = None
    params: Optional[WaveParams] = None


_GL = np.polynomial.legendre.leggauss(80)


def solitary_action(model: ModelSpec, c_x: float, rho_endstate: float, k_phi: float) -> SolitaryData:
    """Action of the solitary wave asymptotic to the constant state ``rho_endstate``.

    The endstate is a double root of ``mu_x0 - Wrho`` and the extremal mass
    ``rho_s`` the nearest simple root; both are deflated from the well
    polynomial before the ``sin^2`` substitution anchored at ``rho_s``.
    """
    params = critical_point_params(model, c_x, rho_endstate, k_phi)
    d2 = _d2W(model, rho_endstate, params)
    if d2 >= 0:
        raise NoSolitaryWave("endstate is not a saddle of the phase portrait", d2W=d2)
    r0 = rho_endstate
    c = well_polynomial(model, params)
    Q, _ = P.polydiv(c, P.polyfromroots([r0, r0]))
    roots = _positive_real_roots(Q)
    roots = roots[np.abs(roots - r0) > 1e-9 * r0]
    if roots.size == 0:
        raise NoSolitaryWave("no simple root next to the endstate")
    rho_s = float(roots[np.argmin(np.abs(roots - r0))])
    # mu_x0 - Wrho = (rho - r0)^2 Q / (4 rho kappa(2 rho)); Q > 0 between r0 and rho_s
    mid = 0.5 * (r0 + rho_s)
    if P.polyval(mid, Q) <= 0:
        raise NoSolitaryWave("potential does not stay below the endstate level")
    Q2, _ = P.polydiv(Q, P.polyfromroots([rho_s]))
    dlt = abs(r0 - rho_s)
    sgn = math.copysign(1.0, rho_s - r0)
    x, w = _GL
    u = 0.25 * np.pi * (x + 1.0)
    wu = 0.25 * np.pi * w
    rho = r0 + sgn * dlt * np.sin(u) ** 2
    integrand = np.sin(u) ** 3 * np.cos(u) ** 2 * np.sqrt(np.abs(P.polyval(rho, Q2))) / rho
    theta_s = 2.0 * dlt**2.5 * float(integrand @ wu)
    if 2 * max(r0, rho_s) > model.alpha_max:
        from .errors import ModelRangeExceeded

        raise ModelRangeExceeded("solitary wave leaves the model range", alpha=2 * max(r0, rho_s))
    return SolitaryData(c_x=c_x, rho_endstate=r0, k_phi=k_phi, rho_s=rho_s, theta_s=theta_s, params=params)


def vk_index(model: ModelSpec, c_x: float, rho_endstate: float, k_phi: float, h: float = 1e-3) -> float:
    """``d^2 Theta_s / d c_x^2`` at fixed ``(rho_endstate, k_phi)`` by Richardson-extrapolated central differences."""

    def f(c):
        return solitary_action(model, c, rho_endstate, k_phi).theta_s

    f0 = f(c_x)

    def d2(step):
        return (f(c_x + step) - 2 * f0 + f(c_x - step)) / step**2

    return float((4 * d2(h / 2) - d2(h)) / 3)


# ---------------------------------------------------------------------------
# Constant states


def constant_state_check(model: ModelSpec, rho0: float, k_phi: float = 0.0) -> dict:
    """Spectral stability of the constant state with mass ``rho0``.

    The dispersion tensor has longitudinal entry ``kappa`` and transverse entry
    ``kappa_transverse``.  A nonzero state is unstable iff ``rho0 delta_hyp != 0``
    and either the tensor is indefinite or its sign is opposite to ``delta_hyp``.
    """
    if rho0 < 0:
        raise ValueError("rho0 must be nonnegative")
    if rho0 == 0:
        return {"rho0": 0.0, "delta_hyp": None, "verdict": "STABLE"}
    dh = delta_hyp(model, rho0, k_phi)
    signs = {int(np.sign(model.kappa_at(2 * rho0))), int(np.sign(model.kappa_t_at(2 * rho0)))} - {0}
    if dh == 0 or not signs:
        verdict = "STABLE"
    elif len(signs) == 2:
        verdict = "UNSTABLE"
    else:
        verdict = "UNSTABLE" if signs.pop() * dh < 0 else "STABLE"
    return {"rho0": rho0, "delta_hyp": dh, "verdict": verdict}


# ---------------------------------------------------------------------------
# Regime parametrizations of periodic waves


def harmonic_wave_params(model: ModelSpec, c_x: float, rho0: float, k_phi0: float, eps_sq: float) -> WaveParams:
    """Periodic wave at ``mu_x = mu_x0 + eps_sq`` on the small-amplitude side."""
    hp = harmonic_point(model, c_x, rho0, k_phi0)
    return WaveParams(hp.mu_x0 + eps_sq, c_x, hp.omega_phi0, hp.mu_phi0)


def large_period_wave_params(
    model: ModelSpec, c_x: float, rho0: float, k_phi: float, epsilon: float
) -> WaveParams:
    """Periodic wave near the solitary wave with endstate ``rho0``, at ``epsilon``.

    ``epsilon`` is the gap between the dual root and the well, relative to the
    well width; ``mu_x`` is found by bisection in ``log(mu_x0 - mu_x)``.
    """
    sol = solitary_action(model, c_x, rho0, k_phi)
    base = sol.params
    scale = max(1.0, abs(base.mu_x))
    seed = tuple(sorted((rho0, sol.rho_s)))

    def eps_of(log_gap):
        p = WaveParams(base.mu_x - math.exp(log_gap), c_x, base.omega_phi, base.mu_phi)
        return large_period_epsilon(model, p, seed=seed)

    # epsilon grows like sqrt(mu_x0 - mu_x); walk the lower end up until the well resolves
    # shallow wells need the upper end stepped down as well
    lo = math.log(1e-13 * scale)
    hi = math.log(1e-2 * scale)
    while True:
        try:
            e_hi = eps_of(hi)
            break
        except NumericalError:
            hi -= 0.5 * math.log(10.0)
            if hi <= lo:
                raise NoSolitaryWave("no periodic wave below the solitary level", epsilon=epsilon)
    while True:
        try:
            e_lo = eps_of(lo)
            break
        except NumericalError:
            lo += math.log(10.0)
            if lo >= hi:
                raise NoSolitaryWave("no resolvable wave below the solitary level", epsilon=epsilon)
    if not e_lo < epsilon < e_hi:
        raise NoSolitaryWave("epsilon target outside the explored family", epsilon=epsilon)
    g = optimize.brentq(lambda s: math.log(eps_of(s)) - math.log(epsilon), lo, hi, xtol=1e-12)
    return WaveParams(base.mu_x - math.exp(g), c_x, base.omega_phi, base.mu_phi)
