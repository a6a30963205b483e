"""Periodic wave profiles from the reduced radius equation.

A wave is fixed by ``(mu_x, c_x, omega_phi, mu_phi)``.  The mass ``rho``
oscillates between two simple roots ``a < b`` of ``mu_x - Wrho(rho)`` and the
half period follows from a quadrature in ``u`` with
``rho = a + (b - a) sin(u)^2``, which cancels the square-root endpoint
singularities.  Over ``u in [0, pi]`` the same map covers a full period.

Writing ``mu_x - Wrho = Pw(rho) / (4 rho kappa(2 rho))`` with a polynomial
``Pw``, the two turning points are deflated out of ``Pw`` exactly, so every
integrand below is a smooth function of ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate, optimize

from .errors import (
    DegenerateWell,
    ModelRangeExceeded,
    NoDualPoint,
    NonpositiveRho,
    NoWellFound,
    QuadratureNotConverged,
)
from .model import ModelSpec

__all__ = [
    "WaveParams",
    "WaveProfile",
    "Averages",
    "Well",
    "nu",
    "effective_potential",
    "well_polynomial",
    "turning_points",
    "rho_dual",
    "large_period_epsilon",
    "solve_profile",
    "wave_averages",
    "radius_ode_check",
    "graded_rule",
]


@dataclass(frozen=True)
class WaveParams:
    mu_x: float
    c_x: float
    omega_phi: float
    mu_phi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mu_x, self.c_x, self.omega_phi, self.mu_phi], dtype=float)

    @classmethod
    def from_array(cls, p: Sequence[float]) -> "WaveParams":
        return cls(*(float(v) for v in p))

    def validate(self, model: ModelSpec) -> None:
        if self.mu_phi == 0.0 and self.mu_x == -float(model.W_at(0.0)):
            raise ValueError("parameters select the trivial zero solution")


# ---------------------------------------------------------------------------
# Polynomial and truncated Taylor series helpers


def _scaled(coeffs: np.ndarray, s: float) -> np.ndarray:
    """Coefficients of ``alpha -> p(s * alpha)``."""
    return np.asarray(coeffs, dtype=float) * s ** np.arange(len(coeffs))


def _taylor(coeffs: np.ndarray, x0, n: int) -> np.ndarray:
    """Taylor coefficients ``p^(k)(x0)/k!`` for ``k <= n``; shape ``(n+1,) + shape(x0)``."""
    x0 = np.asarray(x0, dtype=float)
    out = np.zeros((n + 1,) + x0.shape)
    d = np.asarray(coeffs, dtype=float)
    fact = 1.0
    for k in range(n + 1):
        out[k] = P.polyval(x0, d) / fact if d.size else 0.0
        d = P.polyder(d) if d.size > 1 else np.zeros(1)
        fact *= k + 1
    return out


def _series_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    n = num.shape[0]
    q = np.zeros_like(num)
    for k in range(n):
        acc = num[k].copy()
        for j in range(1, k + 1):
            acc -= den[j] * q[k - j]
        q[k] = acc / den[0]
    return q


_FACT = np.array([1.0, 1.0, 2.0, 6.0, 24.0, 120.0])


def nu(model: ModelSpec, rho, c_x: float, mu_phi: float):
    """Phase velocity ``(mu_phi - c_x rho) / (2 rho kappa(2 rho))``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise NonpositiveRho("nu requires rho > 0")
    out = (mu_phi - c_x * rho) / (2.0 * rho * model.kappa_at(2.0 * rho))
    return out if out.ndim else float(out)


def effective_potential(model: ModelSpec, rho, params: WaveParams, order: int = 0):
    """``d^order/drho^order`` of the effective potential, exact.

    ``Wrho = -W(2 rho) + omega_phi rho + (mu_phi - c_x rho)^2 / (4 rho kappa(2 rho))``,
    which is the expanded form once ``Q = rho nu`` is substituted.
    """
    if not 0 <= order <= 4:
        from .errors import OrderTooHigh

        raise OrderTooHigh(f"order {order} not in 0..4", order=order)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise NonpositiveRho("effective potential requires rho > 0")
    W2 = _scaled(model.W, 2.0)
    num = P.polypow([params.mu_phi, -params.c_x], 2)
    den = 4.0 * P.polymulx(_scaled(model.kappa, 2.0))
    series = -_taylor(W2, rho, order) + _series_div(_taylor(num, rho, order), _taylor(den, rho, order))
    lin = np.zeros_like(series)
    lin[0] = params.omega_phi * rho
    if order >= 1:
        lin[1] = params.omega_phi
    val = (series + lin)[order] * _FACT[order]
    return val if val.ndim else float(val)


def potential_param_derivatives(model: ModelSpec, rho, params: WaveParams) -> np.ndarray:
    """Derivatives of ``mu_x - Wrho`` in ``(mu_x, c_x, omega_phi, mu_phi)``: ``(1, rho nu, -rho, -nu)``."""
    rho = np.asarray(rho, dtype=float)
    v = (params.mu_phi - params.c_x * rho) / (2.0 * rho * model.kappa_at(2.0 * rho))
    return np.stack([np.ones_like(rho), rho * v, -rho, -v])


def well_polynomial(model: ModelSpec, params: WaveParams) -> np.ndarray:
    """``Pw(rho) = 4 rho kappa(2 rho) (mu_x - Wrho(rho))`` as low-first coefficients."""
    k2 = _scaled(model.kappa, 2.0)
    W2 = _scaled(model.W, 2.0)
    inner = P.polyadd(P.polyadd([params.mu_x, -params.omega_phi], W2), [0.0])
    first = 4.0 * P.polymulx(P.polymul(k2, inner))
    return P.polysub(first, P.polypow([params.mu_phi, -params.c_x], 2))


# ---------------------------------------------------------------------------
# Quadrature rule on [0, pi/2]


@lru_cache(maxsize=8)
def graded_rule(order: int = 30, ratio: float = 0.25, depth: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on ``[0, pi/2]`` graded toward both ends.

    The grading resolves integrands that are smooth on the interval but have
    complex singularities close to an endpoint, as happens when a third root
    of ``mu_x - Wrho`` approaches a turning point.
    """
    half = np.pi / 4
    cuts = [0.0]
    d = depth
    inner = []
    while d < half * ratio:
        inner.append(d)
        d /= ratio
    cuts += inner + [half]
    left = np.array(cuts)
    right = np.pi / 2 - left[::-1]
    edges = np.concatenate([left, right[1:]])
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


_GL24 = np.polynomial.legendre.leggauss(24)


def _gl_on(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, w = _GL24
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


# ---------------------------------------------------------------------------
# Turning points


def _positive_real_roots(coeffs: np.ndarray) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size < 2:
        return np.array([])
    roots = P.polyroots(c)
    scale = 1.0 + np.abs(roots)
    real = roots[np.abs(roots.imag) <= 1e-7 * scale].real
    real = real[real > 0]
    out = []
    for r in np.sort(real):
        out.append(_newton_polish(c, r))
    return np.unique(np.array(out))


def _newton_polish(c: np.ndarray, r: float) -> float:
    dc = P.polyder(c)
    for _ in range(6):
        f, df = P.polyval(r, c), P.polyval(r, dc)
        if df == 0:
            break
        step = f / df
        r -= step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return float(r)


def _degeneracy_scale(c: np.ndarray, r: float) -> float:
    dc = P.polyder(c)
    mags = np.abs(dc) * np.abs(r) ** np.arange(len(dc))
    return float(mags.sum())


def _check_double_roots(c: np.ndarray, tol: float) -> None:
    dc = P.polyder(c)
    for r in _positive_real_roots(dc):
        val = P.polyval(r, c)
        mag = float((np.abs(c) * abs(r) ** np.arange(len(c))).sum())
        if abs(val) <= tol * mag:
            raise DegenerateWell(
                "double root of mu_x - Wrho (regime boundary)", rho=float(r)
            )


def turning_points(
    model: ModelSpec,
    params: WaveParams,
    seed: Optional[tuple[float, float]] = None,
    degeneracy_tol: float = 1e-12,
) -> tuple[float, float]:
    """Bracketing simple roots ``(rho_min, rho_max)`` of ``mu_x - Wrho``.

    ``seed`` picks the well overlapping a given interval when several
    coexist; by default the leftmost bounded well is returned.
    """
    c = well_polynomial(model, params)
    _check_double_roots(c, degeneracy_tol)
    roots = _positive_real_roots(c)
    wells = []
    for a, b in zip(roots[:-1], roots[1:]):
        if b - a <= 1e-14 * b:
            continue
        if P.polyval(0.5 * (a + b), c) > 0:
            wells.append((float(a), float(b)))
    if not wells:
        raise NoWellFound("mu_x - Wrho has no bounded positive well", roots=roots.tolist())
    if seed is not None:
        lo, hi = seed
        picked = [w for w in wells if w[0] < hi and w[1] > lo]
        if not picked:
            raise NoWellFound("no well overlaps the seed interval", seed=list(seed))
        wells = picked
    a, b = wells[0]
    for r in (a, b):
        if abs(P.polyval(r, P.polyder(c))) <= degeneracy_tol * _degeneracy_scale(c, r):
            raise DegenerateWell("turning point is not a simple root", rho=r)
    return a, b


def rho_dual(model: ModelSpec, params: WaveParams, seed=None) -> float:
    """Root of ``mu_x - Wrho`` adjacent to the well on the saddle side.

    Depending on whether the solitary endstate is an infimum or a supremum of
    the mass, that root sits left of ``rho_min`` or right of ``rho_max``; the
    closer of the two adjacent roots is returned.
    """
    a, b = turning_points(model, params, seed)
    roots = _positive_real_roots(well_polynomial(model, params))
    left = roots[roots < a * (1 - 1e-14)]
    right = roots[roots > b * (1 + 1e-14)]
    cands = []
    if left.size:
        cands.append(float(left.max()))
    if right.size:
        cands.append(float(right.min()))
    if not cands:
        raise NoDualPoint("no further positive root next to the well")
    return min(cands, key=lambda r: min(abs(r - a), abs(r - b)))


def large_period_epsilon(model: ModelSpec, params: WaveParams, seed=None) -> float:
    """Distance from the dual point to the well, relative to the well width."""
    a, b = turning_points(model, params, seed)
    r = rho_dual(model, params, seed)
    return (a - r) / (b - a) if r < a else (r - b) / (b - a)


# ---------------------------------------------------------------------------
# The well and its integrals


class Well:
    """A single oscillation well with turning points deflated out.

    ``mu_x - Wrho(rho) = (rho - a)(b - rho) g(rho)`` with ``g > 0`` on ``[a, b]``.
    """

    def __init__(self, model: ModelSpec, params: WaveParams, seed=None):
        self.model = model
        self.params = params
        a, b = turning_points(model, params, seed)
        if 2.0 * b > model.alpha_max:
            raise ModelRangeExceeded(
                f"|V|^2 reaches {2 * b:.6g} beyond alpha_max={model.alpha_max}", alpha=2 * b
            )
        self.a, self.b = a, b
        c = well_polynomial(model, params)
        # Pw = -(rho - a)(rho - b) G
        quot, _ = P.polydiv(c, P.polyfromroots([a, b]))
        self.G = -quot

    def rho(self, u):
        return self.a + (self.b - self.a) * np.sin(u) ** 2

    def g(self, rho):
        return P.polyval(rho, self.G) / (4.0 * rho * self.model.kappa_at(2.0 * rho))

    def dxdu(self, u):
        r = self.rho(u)
        return np.sqrt(self.model.kappa_at(2.0 * r) / r) / np.sqrt(self.g(r))

    def nu(self, rho):
        p = self.params
        return (p.mu_phi - p.c_x * rho) / (2.0 * rho * self.model.kappa_at(2.0 * rho))

    def rho_x(self, u):
        return (self.b - self.a) * np.sin(2.0 * u) / self.dxdu(u)

    # Integrals over the half period u in [0, pi/2]
    def half_integral(self, f, order: int = 30, check: bool = False) -> np.ndarray:
        """``int_0^{pi/2} f(u) du`` on the graded rule; ``f`` maps nodes to ``(..., n)``."""
        u, w = graded_rule(order)
        val = f(u) @ w
        if check:
            u2, w2 = graded_rule(order - 10)
            val2 = f(u2) @ w2
            err = np.max(np.abs(val - val2))
            if err > 1e-10 * max(1.0, float(np.max(np.abs(val)))):
                raise QuadratureNotConverged(
                    "graded quadrature did not converge", error=float(err)
                )
        return val

    def period(self, check: bool = True) -> float:
        return float(2.0 * self.half_integral(self.dxdu, check=check))

    def rotation(self) -> float:
        return float(2.0 * self.half_integral(lambda u: self.nu(self.rho(u)) * self.dxdu(u)))

    def action(self, check: bool = True) -> float:
        def f(u):
            r = self.rho(u)
            s = np.sin(u) * np.cos(u)
            return s * s * np.sqrt(self.g(r)) * np.sqrt(self.model.kappa_at(2.0 * r) / r)

        return float(4.0 * (self.b - self.a) ** 2 * self.half_integral(f, check=check))

    def gradient(self, check: bool = False) -> np.ndarray:
        def f(u):
            return potential_param_derivatives(self.model, self.rho(u), self.params) * self.dxdu(u)

        return 2.0 * self.half_integral(f, check=check)

    def param_polynomials(self) -> list[np.ndarray]:
        """``d Pw / d p`` for ``p`` in ``(mu_x, c_x, omega_phi, mu_phi)``, as polynomials."""
        p = self.params
        k4 = 4.0 * P.polymulx(_scaled(self.model.kappa, 2.0))
        s = np.array([p.mu_phi, -p.c_x])
        return [k4, 2.0 * P.polymulx(s), -P.polymulx(k4), -2.0 * s]

    def hessian(self, check: bool = True, order: int = 30) -> np.ndarray:
        """Hessian of ``Theta`` differentiated under the integral in ``u``.

        In ``u`` the gradient integrand ``F / sqrt(G)`` is smooth, with
        ``F = 4 kappa(2 rho) d(mu_x - Wrho)``, and the endpoints are fixed; the
        parameters act through ``a``, ``b`` and the deflated ``G``.
        """
        a, b, G = self.a, self.b, self.G
        c = well_polynomial(self.model, self.params)
        dc = P.polyder(c)
        dPw = self.param_polynomials()
        da = np.array([-P.polyval(a, q) / P.polyval(a, dc) for q in dPw])
        db = np.array([-P.polyval(b, q) / P.polyval(b, dc) for q in dPw])
        ab = P.polyfromroots([a, b])
        dG = []
        for q, ea, eb in zip(dPw, da, db):
            num = P.polyadd(q, ea * P.polymul([b, -1.0], G))
            num = P.polysub(num, eb * P.polymul([-a, 1.0], G))
            quot, _ = P.polydiv(num, ab)
            dG.append(-quot)
        G1 = P.polyder(G)
        pr = self.params

        def f(u):
            s2 = np.sin(u) ** 2
            rho = a + (b - a) * s2
            drho = np.outer(da, 1.0 - s2) + np.outer(db, s2)  # (q, n)
            k = self.model.kappa_at(2.0 * rho)
            k1 = self.model.kappa_at(2.0 * rho, 1)
            sm = pr.mu_phi - pr.c_x * rho
            F = np.stack([4 * k, 2 * sm, -4 * rho * k, -2 * sm / rho])
            Fr = np.stack([8 * k1, -2 * pr.c_x + 0 * rho, -4 * k - 8 * rho * k1, 2 * pr.mu_phi / rho**2])
            dF = np.zeros((4, 4) + rho.shape)
            dF[1, 1], dF[1, 3] = -2 * rho, 2.0
            dF[3, 1], dF[3, 3] = 2.0, -2.0 / rho
            g = P.polyval(rho, G)
            gr = P.polyval(rho, G1)
            dg = np.stack([P.polyval(rho, q) for q in dG]) + gr * drho
            tot_F = dF + Fr[:, None] * drho[None]
            return tot_F / np.sqrt(g) - 0.5 * F[:, None] * dg[None] / g**1.5

        return self.half_integral(f, order=order, check=check)

    def cumulative(self, f, u_grid: np.ndarray) -> np.ndarray:
        """``int_0^{u_k} f`` on an increasing grid starting at 0, panel by panel."""
        nodes, weights = _gl_on(u_grid[:-1], u_grid[1:])
        pieces = (f(nodes) * weights).sum(axis=-1)
        return np.concatenate([[0.0], np.cumsum(pieces)])


# ---------------------------------------------------------------------------
# Profile


@dataclass
class WaveProfile:
    """Sampled profile over one period, phase convention ``rho(0) = rho_min``.

    Samples are uniform in the substitution variable ``u`` over ``[0, pi]``;
    ``n_points`` per half period, endpoint included.
    """

    params: WaveParams
    x_grid: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    V: np.ndarray
    X_x: float
    xi_phi: float
    k_x: float
    k_phi: float
    omega_x: float
    rho_min: float
    rho_max: float
    u_grid: np.ndarray = field(repr=False)
    rho_x: np.ndarray = field(repr=False)
    Vx: np.ndarray = field(repr=False)
    well: Well = field(repr=False)

    def state_at(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """Exact ``(V(x), V_x(x))`` for ``x`` in ``[0, X_x]``; see ``spectral.profile_state`` beyond."""
        x = min(max(float(x), 0.0), self.X_x)
        k = int(np.clip(np.searchsorted(self.x_grid, x, side="right") - 1, 0, len(self.x_grid) - 2))
        well = self.well
        lo, hi = self.u_grid[k], self.u_grid[k + 1]

        def xu(u):
            nodes, w = _gl_on(lo, u)
            return self.x_grid[k] + float((well.dxdu(nodes) * w).sum()) - x

        f_lo, f_hi = xu(lo), xu(hi)
        if f_lo >= 0:
            u = lo
        elif f_hi <= 0:
            u = hi
        else:
            u = optimize.brentq(xu, lo, hi, xtol=1e-15, rtol=1e-15)
        nodes, w = _gl_on(lo, u)
        theta = self.theta[k] + float((well.nu(well.rho(nodes)) * well.dxdu(nodes) * w).sum())
        r = float(well.rho(u))
        return _assemble_V(r, float(well.rho_x(u)), theta, float(well.nu(r)))


def _rotation(theta) -> np.ndarray:
    """``exp(theta J) e1 = (cos theta, -sin theta)`` for ``J = [[0, 1], [-1, 0]]``."""
    return np.stack([np.cos(theta), -np.sin(theta)], axis=-1)


def _assemble_V(rho, rho_x, theta, v):
    amp = np.sqrt(2.0 * np.asarray(rho))
    e = _rotation(theta)
    Je = np.stack([e[..., 1], -e[..., 0]], axis=-1)
    V = amp[..., None] * e
    Vx = (np.asarray(rho_x) / amp)[..., None] * e + (amp * np.asarray(v))[..., None] * Je
    return V, Vx


def solve_profile(model: ModelSpec, params: WaveParams, n_points: int = 256, seed=None) -> WaveProfile:
    """Build the periodic profile by quadrature of the first integral."""
    if n_points < 64:
        raise ValueError("n_points must be at least 64")
    well = Well(model, params, seed)
    X = well.period(check=True)
    xi = well.rotation()
    u_grid = np.linspace(0.0, np.pi, 2 * n_points + 1)
    x_grid = well.cumulative(well.dxdu, u_grid)
    theta = well.cumulative(lambda u: well.nu(well.rho(u)) * well.dxdu(u), u_grid)
    # Pin the endpoint to the high-accuracy totals.
    x_grid[-1], theta[-1] = X, xi
    rho = well.rho(u_grid)
    rho_x = well.rho_x(u_grid)
    rho[0], rho_x[0], rho_x[n_points], rho_x[-1] = well.a, 0.0, 0.0, 0.0
    rho[n_points] = well.b
    v = well.nu(rho)
    V, Vx = _assemble_V(rho, rho_x, theta, v)
    k_x = 1.0 / X
    return WaveProfile(
        params=params,
        x_grid=x_grid,
        rho=rho,
        v=v,
        theta=theta,
        V=V,
        X_x=X,
        xi_phi=xi,
        k_x=k_x,
        k_phi=xi / X,
        omega_x=-k_x * params.c_x,
        rho_min=well.a,
        rho_max=well.b,
        u_grid=u_grid,
        rho_x=rho_x,
        Vx=Vx,
        well=well,
    )


# ---------------------------------------------------------------------------
# Averages


@dataclass(frozen=True)
class Averages:
    m_bar: float
    q_bar: float
    sigma1: float
    sigma2: float
    sigma3: float
    tau0: float
    tau1: float
    tau2: float
    tau3: float

    def sigma_tau_defect(self, k_x: float) -> float:
        """Largest relative mismatch of ``sigma_j`` against ``tau_j / k_x``."""
        out = 0.0
        for s, t in ((self.sigma1, self.tau1), (self.sigma2, self.tau2), (self.sigma3, self.tau3)):
            ref = max(abs(s), abs(self.sigma1) * 1e-12)
            out = max(out, abs(s - t / k_x) / ref)
        return out


def wave_averages(model: ModelSpec, profile: WaveProfile) -> Averages:
    """Per-period averages, by two independent routes.

    The transverse coefficient (``kappa`` unless declared) enters ``sigma_j``
    and ``tau_1..tau_3``.  The sigma integrals use the hydrodynamic forms on the graded Gauss rule;
    the tau averages use the ``V`` samples with the periodic trapezoid rule in
    ``u`` (spectrally accurate since every integrand is ``pi``-periodic).
    """
    well = profile.well
    X = profile.X_x

    def hydro(u):
        r = well.rho(u)
        h = well.dxdu(u)
        k = model.kappa_t_at(2.0 * r)
        v = well.nu(r)
        rx = well.rho_x(u)
        return np.stack([r, r * v, k * 2 * r, k * 2 * r * v, k * (rx**2 / (2 * r) + 2 * r * v * v)]) * h

    m_int, q_int, s1, s2, s3 = 2.0 * well.half_integral(hydro)

    # Trapezoid over u in [0, pi) on the sampled V, V_x.
    V, Vx = profile.V[:-1], profile.Vx[:-1]
    h = well.dxdu(profile.u_grid[:-1])
    du = profile.u_grid[1] - profile.u_grid[0]
    a2 = np.einsum("ij,ij->i", V, V)
    k = model.kappa_t_at(a2)
    kp = model.kappa_at(a2, 1)
    JV = np.stack([V[:, 1], -V[:, 0]], axis=1)
    dens = np.stack([kp * a2, k * a2, k * np.einsum("ij,ij->i", JV, Vx), k * np.einsum("ij,ij->i", Vx, Vx)])
    taus = (dens * h).sum(axis=1) * du / X
    return Averages(
        m_bar=float(m_int / X),
        q_bar=float(q_int / X),
        sigma1=float(s1),
        sigma2=float(s2),
        sigma3=float(s3),
        tau0=float(taus[0]),
        tau1=float(taus[1]),
        tau2=float(taus[2]),
        tau3=float(taus[3]),
    )


def radius_ode_check(model: ModelSpec, profile: WaveProfile, rtol: float = 1e-12) -> float:
    """Max deviation between ``rho`` and an RK solution of the second-order radius equation.

    ``rho_xx = -(k'(rho) rho_x^2 + Wrho'(rho)) / (2 k(rho))`` with ``k = kappa(2 rho)/(4 rho)``.
    """
    params = profile.params

    def rhs(_x, y):
        r, rx = y
        k = model.kappa_at(2 * r) / (4 * r)
        kp = (2 * model.kappa_at(2 * r, 1) * r - model.kappa_at(2 * r)) / (4 * r * r)
        return [rx, -(kp * rx * rx + effective_potential(model, r, params, 1)) / (2 * k)]

    sol = integrate.solve_ivp(
        rhs,
        (0.0, profile.X_x),
        [profile.rho_min, 0.0],
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
        t_eval=profile.x_grid,
    )
    return float(np.max(np.abs(sol.y[0] - profile.rho)))
