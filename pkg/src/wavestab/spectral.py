"""Linearized spectral problem, monodromy and the Evans function.

The spectral relation ``lambda psi = J Hess(H_u)[V] psi + eta^2 kappa J psi`` is
written as ``psi'' = A(x) psi + B(x) psi'`` and integrated as a first-order
system on ``Phi = (psi, psi')``.  The profile ``(V, V_x)`` is carried along
in the same integration.

For large ``|lambda|`` the monodromy is built from several shorter segments
and the Evans determinant is taken on the block-cyclic matrix, which keeps
each segment's growth moderate without changing the determinant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DiskCaptureFailed, IntegratorFailed, ModelRangeExceeded, RootOnContour
from .model import ModelSpec
from .profile import WaveParams, WaveProfile

__all__ = [
    "ConstantProfile",
    "MonodromyResult",
    "linearized_system",
    "profile_rhs",
    "monodromy",
    "evans",
    "evans_batch",
    "twist_matrix",
    "count_unstable",
    "eigencurves",
    "calibrate_R0",
]

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _J(v):
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def _rot(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


@dataclass
class ConstantProfile:
    """A constant state ``V(x) = sqrt(2 rho0) exp(k_phi x J) e1`` viewed on a period ``X``.

    Parameters must satisfy the constant-state relation for this to be a
    solution; :meth:`for_model` fills ``omega_phi`` accordingly.
    """

    params: WaveParams
    rho0: float
    k_phi: float
    X_x: float

    @property
    def xi_phi(self) -> float:
        return self.k_phi * self.X_x

    @property
    def k_x(self) -> float:
        return 1.0 / self.X_x

    @classmethod
    def for_model(cls, model: ModelSpec, rho0: float, k_phi: float, X: float, c_x: float = 0.0):
        a = 2.0 * rho0
        omega = (
            c_x * k_phi
            + (model.kappa_at(a, 1) * a + model.kappa_at(a)) * k_phi**2
            + 2.0 * model.W_at(a, 1)
        )
        mu_phi = c_x * rho0 + model.kappa_at(a) * a * k_phi
        mu_x = (
            -0.5 * model.kappa_at(a) * a * k_phi**2
            - model.W_at(a)
            - c_x * rho0 * k_phi
            + omega * rho0
            + mu_phi * k_phi
        )
        return cls(WaveParams(float(mu_x), c_x, float(omega), float(mu_phi)), rho0, k_phi, X)

    def state_at(self, x: float):
        V = np.sqrt(2.0 * self.rho0) * np.array([np.cos(self.k_phi * x), -np.sin(self.k_phi * x)])
        return V, self.k_phi * _J(V)


def profile_state(profile, x: float) -> tuple[np.ndarray, np.ndarray]:
    """``(V, V_x)`` at any real ``x`` using the twisted periodicity."""
    X = profile.X_x
    n = int(np.floor(x / X))
    r = x - n * X
    if r > X * (1 - 1e-15):
        n, r = n + 1, 0.0
    V, Vx = profile.state_at(r)
    if n:
        E = _rot(n * profile.xi_phi)
        V, Vx = E @ V, E @ Vx
    return V, Vx


def _coefficients(model: ModelSpec, params: WaveParams, V, Vx):
    """Profile acceleration and the ``lambda``-free parts of ``A`` and ``B``."""
    a = V @ V
    k, k1, k2 = (model.kappa_at(a, j) for j in range(3))
    W1, W2 = model.W_at(a, 1), model.W_at(a, 2)
    vv = Vx @ Vx
    vdx = V @ Vx
    w, c = params.omega_phi, params.c_x
    JVx = _J(Vx)
    Vxx = ((k1 * vv + 2 * W1 - w) * V - c * JVx - 2 * k1 * vdx * Vx) / k
    S = k1 * vv + 2 * W1 - w
    ax = 2 * vdx
    A = (
        S * np.eye(2)
        + (2 * k2 * vv + 4 * W2) * np.outer(V, V)
        - 2 * k2 * ax * np.outer(Vx, V)
        - 2 * k1 * np.outer(Vx, Vx)
        - 2 * k1 * np.outer(Vxx, V)
    ) / k
    B = (2 * k1 * np.outer(V, Vx) - c * J2 - k1 * ax * np.eye(2) - 2 * k1 * np.outer(Vx, V)) / k
    return Vxx, A, B, k


def linearized_system(model: ModelSpec, profile, lam: complex, eta_sq: float) -> Callable[[float], np.ndarray]:
    """Return ``x -> M(x)``, the 4x4 matrix of ``Phi' = M Phi`` with ``Phi = (psi, psi')``."""
    params = profile.params

    def M(x: float) -> np.ndarray:
        V, Vx = profile_state(profile, x)
        if V @ V > model.alpha_max:
            raise ModelRangeExceeded("profile leaves the model range", alpha=float(V @ V))
        _, A, B, k = _coefficients(model, params, V, Vx)
        kt = model.kappa_t_at(V @ V)
        out = np.zeros((4, 4), dtype=complex)
        out[:2, 2:] = np.eye(2)
        out[2:, :2] = A + (lam * J2 + eta_sq * kt * np.eye(2)) / k
        out[2:, 2:] = B
        return out

    return M


def profile_rhs(model: ModelSpec, params: WaveParams):
    def rhs(_x, y):
        V, Vx = y[:2], y[2:4]
        Vxx, *_ = _coefficients(model, params, V, Vx)
        return np.concatenate([Vx, Vxx])

    return rhs


def _segment(model, params, state0, x_span, lams, eta_sqs, rtol, atol):
    """Integrate profile plus a batch of fundamental matrices over one segment."""
    L = len(lams)
    lams = np.asarray(lams, dtype=complex)
    eta_sqs = np.asarray(eta_sqs, dtype=float)
    R0 = np.broadcast_to(np.eye(4, dtype=complex), (L, 4, 4))
    y0 = np.concatenate([state0.astype(complex), R0.ravel()])

    def rhs(_x, y):
        V, Vx = y[:2].real, y[2:4].real
        Vxx, A, B, k = _coefficients(model, params, V, Vx)
        kt = model.kappa_t_at(V @ V)
        R = y[4:].reshape(L, 4, 4)
        top, bot = R[:, :2, :], R[:, 2:, :]
        Al = A[None] + (lams[:, None, None] * J2[None] + (eta_sqs * kt)[:, None, None] * np.eye(2)) / k
        dR = np.empty_like(R)
        dR[:, :2, :] = bot
        dR[:, 2:, :] = Al @ top + B[None] @ bot
        return np.concatenate([Vx, Vxx, dR.ravel()])

    sol = integrate.solve_ivp(rhs, x_span, y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegratorFailed(sol.message, x_span=list(x_span))
    return sol.y[4:, -1].reshape(L, 4, 4)


def twist_matrix(xi: float, xi_phi: float) -> np.ndarray:
    E = _rot(xi_phi)
    T = np.zeros((4, 4), dtype=complex)
    T[:2, :2] = E
    T[2:, 2:] = E
    return np.exp(1j * xi) * T


def _segments_needed(model, profile, lams, eta_sqs, growth_per_segment: float) -> int:
    kmin = float(model.kappa_at(2 * _rho_range(profile)[0]))
    rate = np.sqrt((np.max(np.abs(lams)) + np.max(eta_sqs) * 2.0 + 1.0) / max(kmin, 1e-12))
    return int(max(1, np.ceil(rate * profile.X_x / growth_per_segment)))


def _rho_range(profile):
    if isinstance(profile, ConstantProfile):
        return profile.rho0, profile.rho0
    return profile.rho_min, profile.rho_max


def _default_x0(profile) -> float:
    return 0.25 * profile.X_x


@dataclass
class MonodromyResult:
    R: np.ndarray
    det_check: complex
    evans: Optional[complex] = None
    segments: Optional[list] = None


def _segment_matrices(model, profile, lams, eta_sqs, x0, rtol, n_seg, lam_ceiling):
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    eta_sqs = np.broadcast_to(np.asarray(eta_sqs, dtype=float), lams.shape)
    if np.any(np.abs(lams) > lam_ceiling):
        raise IntegratorFailed(f"|lambda| beyond the supported ceiling {lam_ceiling}")
    rmax = _rho_range(profile)[1]
    if 2 * rmax > model.alpha_max:
        raise ModelRangeExceeded("profile leaves the model range", alpha=2 * rmax)
    if n_seg is None:
        n_seg = _segments_needed(model, profile, lams, eta_sqs, 8.0)
    X = profile.X_x
    edges = x0 + X * np.arange(n_seg + 1) / n_seg
    mats = []
    for k in range(n_seg):
        V, Vx = profile_state(profile, edges[k])
        mats.append(
            _segment(
                model,
                profile.params,
                np.concatenate([V, Vx]),
                (edges[k], edges[k + 1]),
                lams,
                eta_sqs,
                rtol,
                1e-14,
            )
        )
    return mats


def monodromy(
    model: ModelSpec,
    profile,
    lam: complex,
    eta_sq: float,
    x0: Optional[float] = None,
    rtol: float = 1e-10,
    lam_ceiling: float = 500.0,
) -> MonodromyResult:
    """``R(x0 + X, x0; lambda, eta)`` with the Liouville determinant check.

    Since ``det R`` must equal ``exp(int tr M)``, which is one over a period,
    ``det_check`` holds ``det R - 1``.
    """
    x0 = 0.0 if x0 is None else x0
    mats = _segment_matrices(model, profile, [lam], [eta_sq], x0, rtol, 1, lam_ceiling)
    R = mats[0][0]
    trace_int = _trace_integral(model, profile, x0)
    return MonodromyResult(R=R, det_check=complex(np.linalg.det(R) - np.exp(trace_int)))


def _trace_integral(model, profile, x0) -> float:
    """``int tr M`` over one period.

    ``tr M = tr B = -2 d/dx log kappa(|V|^2)``, so the integral is a difference
    of endpoint values (zero for a genuinely periodic modulus).
    """
    Va, _ = profile_state(profile, x0)
    Vb, _ = profile_state(profile, x0 + profile.X_x)
    return float(-2.0 * (np.log(model.kappa_at(Vb @ Vb)) - np.log(model.kappa_at(Va @ Va))))


def _block_cyclic_det(mats: Sequence[np.ndarray], T: np.ndarray) -> complex:
    N = len(mats)
    if N == 1:
        return complex(np.linalg.det(mats[0] - T))
    big = np.zeros((4 * N, 4 * N), dtype=complex)
    for k in range(N - 1):
        big[4 * k : 4 * k + 4, 4 * k : 4 * k + 4] = mats[k]
        big[4 * k : 4 * k + 4, 4 * k + 4 : 4 * k + 8] = -np.eye(4)
    big[-4:, -4:] = mats[-1]
    big[-4:, :4] = -T
    return complex(np.linalg.det(big))


def evans_batch(
    model: ModelSpec,
    profile,
    xi,
    lams,
    eta_sqs,
    x0: Optional[float] = None,
    rtol: float = 1e-11,
    segments: Optional[int] = None,
    lam_ceiling: float = 500.0,
) -> np.ndarray:
    """Evans function on a batch.

    ``xi`` may be a scalar or an array matching ``lams``; batches sharing
    ``eta_sq`` reuse one integration per segment.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    eta_sqs = np.broadcast_to(np.asarray(eta_sqs, dtype=float), lams.shape)
    xis = np.broadcast_to(np.asarray(xi, dtype=float), lams.shape)
    x0 = _default_x0(profile) if x0 is None else x0
    mats = _segment_matrices(model, profile, lams, eta_sqs, x0, rtol, segments, lam_ceiling)
    out = np.empty(lams.shape, dtype=complex)
    for i in range(len(lams)):
        T = twist_matrix(xis[i], profile.xi_phi)
        out[i] = _block_cyclic_det([m[i] for m in mats], T)
    return out


def evans(model: ModelSpec, profile, xi: float, lam: complex, eta_sq: float, **kw) -> complex:
    """``D_xi(lambda, eta) = det(R(x0 + X, x0) - e^{i xi} diag(e^{xi_phi J}, e^{xi_phi J}))``."""
    return complex(evans_batch(model, profile, xi, [lam], [eta_sq], **kw)[0])


# ---------------------------------------------------------------------------
# Root counting


def _rect_boundary(lo: complex, hi: complex, n_side: int) -> np.ndarray:
    """Counter-clockwise closed polygon of the rectangle with corners ``lo``, ``hi``."""
    t = np.linspace(0.0, 1.0, n_side, endpoint=False)
    x0, y0, x1, y1 = lo.real, lo.imag, hi.real, hi.imag
    pts = np.concatenate(
        [
            x0 + (x1 - x0) * t + 1j * y0,
            x1 + 1j * (y0 + (y1 - y0) * t),
            x1 - (x1 - x0) * t + 1j * y1,
            x0 + 1j * (y1 - (y1 - y0) * t),
        ]
    )
    return np.append(pts, pts[0])


def winding_number(func, pts: np.ndarray, max_rounds: int = 12, floor_rel: float = 1e-13) -> int:
    """Winding number of ``func`` along a closed polygon, refined until phase steps are below pi/2."""
    pts = np.asarray(pts, dtype=complex)
    vals = np.asarray(func(pts), dtype=complex)
    for _ in range(max_rounds):
        scale = np.max(np.abs(vals))
        if np.min(np.abs(vals)) <= floor_rel * scale:
            i = int(np.argmin(np.abs(vals)))
            raise RootOnContour("Evans function vanishes on the contour", point=[pts[i].real, pts[i].imag])
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.nonzero(np.abs(dphi) >= np.pi / 2)[0]
        if bad.size == 0:
            return int(np.rint(dphi.sum() / (2 * np.pi)))
        mids = 0.5 * (pts[bad] + pts[bad + 1])
        mvals = np.asarray(func(mids), dtype=complex)
        pts = np.insert(pts, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)
    raise RootOnContour("argument tracking did not resolve the contour")


def count_unstable(
    model: ModelSpec,
    profile,
    xi: float,
    eta_sq: float,
    rect: tuple[complex, complex],
    n_side: int = 24,
    **kw,
) -> int:
    """Number of Evans roots inside the rectangle ``rect = (lower_left, upper_right)``."""
    lo, hi = complex(rect[0]), complex(rect[1])
    if not (hi.real > lo.real and hi.imag > lo.imag):
        raise ValueError("rectangle corners must be (lower-left, upper-right)")
    pts = _rect_boundary(lo, hi, n_side)

    def f(lams):
        return evans_batch(model, profile, xi, lams, eta_sq, **kw)

    return winding_number(f, pts)


# ---------------------------------------------------------------------------
# Critical eigenvalue curves


def _circle_roots(func, center: complex, radius: float, n: int = 64):
    """Roots inside a circle from moment integrals of ``f'/f``.

    ``f'`` is obtained spectrally from the samples on the circle, so the
    contour evaluations are the only calls to ``func``.
    """
    theta = 2 * np.pi * np.arange(n) / n
    z = center + radius * np.exp(1j * theta)
    f = np.asarray(func(z), dtype=complex)
    c = np.fft.fft(f) / n  # f(z) ~ sum_k c_k w^k with w = (z - center)/radius, k mod n
    k = np.fft.fftfreq(n, d=1.0 / n)
    # Coefficients with negative index stand for aliasing of high degrees.
    kk = np.where(k < 0, k + n, k)
    w = np.exp(1j * theta)
    dfdw = np.array([np.sum(c * kk * wj ** (kk - 1)) for wj in w])
    logder = dfdw / f / radius  # d/dz
    count = np.sum(logder * (z - center)) / n
    m = int(np.rint(count.real))
    moments = np.array([np.sum(logder * (z - center) ** (p + 1)) / n for p in range(m + 1)])
    return m, count, moments


def _roots_from_power_sums(s: np.ndarray, m: int) -> np.ndarray:
    """Roots from power sums ``s_p = sum r^p`` via Newton identities."""
    e = np.zeros(m + 1, dtype=complex)
    e[0] = 1.0
    for p in range(1, m + 1):
        acc = 0.0
        for i in range(1, p + 1):
            acc += (-1) ** (i - 1) * e[p - i] * s[i]
        e[p] = acc / p
    coeffs = np.array([(-1) ** p * e[p] for p in range(m + 1)])
    return np.roots(coeffs) if m else np.array([], dtype=complex)


def eigencurves(
    model: ModelSpec,
    profile,
    xi_list: Iterable[float],
    radius: Optional[float] = None,
    n_contour: int = 64,
    expected: int = 4,
    zero_radius: float = 1e-6,
    zero_rtol: float = 2.3e-14,
    **kw,
) -> list[np.ndarray]:
    """The four Evans roots near the origin for each Floquet exponent.

    The disk radius defaults to a doubling search that stops at the first
    radius enclosing ``expected`` roots.  Consecutive root sets are ordered
    by nearest continuation.

    At ``xi = 0`` the root is quadruple and integration error ``e`` splits it
    into a cluster of size about ``sqrt(e)``, so that case uses the disk
    ``zero_radius`` and integrates at ``zero_rtol``, just above the smallest
    tolerance DOP853 accepts.
    """
    out: list[np.ndarray] = []
    prev = None
    for xi in xi_list:
        kw_xi = dict(kw)
        if xi == 0.0:
            kw_xi.setdefault("rtol", zero_rtol)

        def f(lams, xi=xi, kw_xi=kw_xi):
            return evans_batch(model, profile, xi, lams, 0.0, **kw_xi)

        if xi == 0.0 and radius is None:
            r = zero_radius
            m, count, mom = _circle_roots(f, 0.0, r, n_contour)
        elif radius is not None:
            r = radius
            m, count, mom = _circle_roots(f, 0.0, r, n_contour)
        else:
            r = max(abs(xi), 1e-3) * profile.k_x * 0.25
            for _ in range(30):
                m, count, mom = _circle_roots(f, 0.0, r, n_contour)
                if m >= expected:
                    break
                r *= 2.0
        if m != expected or abs(count - m) > 0.1:
            raise DiskCaptureFailed(f"found {count:.3f} roots instead of {expected}", xi=float(xi), radius=r)
        roots = _roots_from_power_sums(mom, m)
        if prev is not None:
            order = []
            avail = list(range(m))
            for p in prev:
                j = min(avail, key=lambda q: abs(roots[q] - p))
                order.append(j)
                avail.remove(j)
            roots = roots[order]
        else:
            roots = roots[np.lexsort((roots.real, roots.imag))]
        out.append(roots)
        prev = roots
    return out


# ---------------------------------------------------------------------------
# High-frequency threshold


def calibrate_R0(
    model: ModelSpec,
    profile,
    eta_sqs: Sequence[float] = (0.0, 1.0, 10.0),
    lam_max: float = 200.0,
    n_grid: int = 40,
    **kw,
) -> float:
    """Smallest sampled ``lambda`` beyond which ``D_0`` and ``D_pi`` stay positive.

    Scans a geometric grid of real ``lambda`` in ``[1e-2, lam_max]``.
    """
    grid = np.geomspace(1e-2, lam_max, n_grid)
    ok = np.ones(n_grid, dtype=bool)
    for eta_sq in eta_sqs:
        for xi in (0.0, np.pi):
            D = evans_batch(model, profile, xi, grid, eta_sq, **kw)
            ok &= (D.real > 0) & (np.abs(D.imag) <= 1e-6 * np.abs(D))
    bad = np.nonzero(~ok)[0]
    if bad.size == 0:
        return float(grid[0])
    if bad[-1] == n_grid - 1:
        raise IntegratorFailed("no positivity threshold below lam_max", lam_max=lam_max)
    return float(grid[bad[-1] + 1])
