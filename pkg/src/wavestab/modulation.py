"""Modulation matrices, the quartic symbol Delta0 and the instability criteria.

``Delta0(lambda, z, zeta) = det(lambda A0 H - z B0 + (zeta^2/lambda) C0)`` with
``H = Hess Theta``.  Its coefficients are written

    Delta0 = sum delta[m, n, p] lambda^(m-p) z^n zeta^(2p),   m + n + p = 4, p <= m.
"""

from __future__ import annotations

import math
from itertools import combinations
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SingularHessian, SingularityNotSpurious
from .profile import Averages

__all__ = [
    "A0",
    "B0",
    "P1",
    "P2",
    "ModulationData",
    "assemble",
    "delta_coefficients",
    "delta_keys",
    "evaluate_delta0",
    "characteristic_speeds",
    "coperiodic_criterion",
    "transverse_criteria",
    "splitting_criteria",
    "low_frequency_symbol",
]

A0 = np.diag([1.0, 1.0, -1.0, -1.0])
B0 = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)
# Row and column permutations carrying A0 H onto Sigma_t (and B0 onto the identity).
P1 = np.array([[0, 0, 0, 1], [1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=float)
P2 = np.array([[0, 0, 0, 1], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0]], dtype=float)

UNSTABLE = "UNSTABLE"
STABLE_CANDIDATE = "STABLE_CANDIDATE"
INCONCLUSIVE = "INCONCLUSIVE"
NOT_APPLICABLE = "NOT_APPLICABLE"
NO_INSTABILITY = "STABLE_AT_TESTED_RESOLUTION"


def delta_keys() -> list[tuple[int, int, int]]:
    return [
        (m, n, 4 - m - n)
        for m in range(5)
        for n in range(5 - m)
        if 4 - m - n <= m
    ]


def C0_matrix(sigma1: float, sigma2: float, sigma3: float) -> np.ndarray:
    C = np.zeros((4, 4))
    C[1, 1], C[1, 2] = -sigma3, sigma2
    C[2, 1], C[2, 2] = -sigma2, sigma1
    return C


@dataclass
class ModulationData:
    A0: np.ndarray
    B0: np.ndarray
    C0: np.ndarray
    Sigma_t: np.ndarray
    Sigma_y: np.ndarray
    delta: dict
    char_speeds: np.ndarray
    hess: np.ndarray
    k_x: float
    low_order_residual: float = 0.0
    imag_residual: float = 0.0
    notes: dict = field(default_factory=dict)


def _complementary_minor_polys(N_of, nz: int, ns: int) -> dict:
    """Coefficient arrays of every minor of ``N(z, s)``, keyed by (rows, cols)."""
    zs = np.exp(2j * np.pi * np.arange(nz) / nz)
    ss = np.exp(2j * np.pi * np.arange(ns) / ns)
    grid = np.array([[N_of(z, s) for s in ss] for z in zs])
    out = {}
    for k in range(5):
        for rows in combinations(range(4), k):
            for cols in combinations(range(4), k):
                if k == 0:
                    vals = np.ones((nz, ns), dtype=complex)
                else:
                    vals = np.linalg.det(grid[:, :, list(rows)][:, :, :, list(cols)])
                out[rows, cols] = np.fft.fft2(vals) / (nz * ns)
    return out


def delta_coefficients(hess: np.ndarray, C0: np.ndarray, tol: float = 1e-9) -> tuple[dict, float, float]:
    """Coefficients of ``Delta0`` by exact interpolation of ``P = lambda^4 Delta0``.

    ``P(lambda, z, s) = det(lambda^2 A0 H - lambda z B0 + s C0)`` with ``s = zeta^2``
    is homogeneous of degree 8 in ``(lambda, z, sqrt(s))``.  It is expanded in
    complementary minors, ``sum det(X[S,T]) det(N[S',T'])`` with ``X = A0 H`` and
    ``N = -z B0 + s C0``; the minors of ``N`` are polynomials recovered by a 2-D
    DFT on roots of unity.  A ``k x k`` minor of ``X`` carries ``lambda^(2k)``, so
    the monomials that must vanish only see entries of ``H``, never products,
    and stay clean when ``H`` is large and nearly rank one.
    """
    X = A0 @ hess
    nz, ns = 9, 5
    minors = _complementary_minor_polys(lambda z, s: -z * B0 + s * C0, nz, ns)
    full = tuple(range(4))
    coef = np.zeros((nz, ns), dtype=complex)  # coef[b, c] multiplies z^b s^c
    for k in range(5):
        for rows in combinations(full, k):
            for cols in combinations(full, k):
                dx = 1.0 if k == 0 else float(np.linalg.det(X[np.ix_(rows, cols)]))
                sign = -1.0 if (sum(rows) + sum(cols)) % 2 else 1.0
                crow = tuple(i for i in full if i not in rows)
                ccol = tuple(i for i in full if i not in cols)
                poly = minors[crow, ccol]
                # only monomials with z^b s^c, b + c = 4 - k, belong to this k
                mask = np.add.outer(np.arange(nz), np.arange(ns)) == 4 - k
                coef += np.where(mask, sign * dx * poly, 0.0)
    norm = float(np.max(np.abs(coef)))
    imag_res = float(np.max(np.abs(coef.imag))) / max(norm, 1e-300)
    low = 0.0
    out = {}
    for b in range(nz):
        for c in range(ns):
            a = 8 - b - 2 * c
            if a < 4:
                low = max(low, abs(coef[b, c]) / max(norm, 1e-300))
            else:
                out[(a - 4 + c, b, c)] = float(coef[b, c].real)
    if low > tol:
        raise SingularityNotSpurious(
            "monomials of lambda-degree below 4 do not vanish", residual=low
        )
    return {k: out.get(k, 0.0) for k in delta_keys()}, low, imag_res


def evaluate_delta0(delta: dict, lam, z, zeta):
    """Evaluate the quartic symbol from its coefficients."""
    lam, z, zeta = np.asarray(lam), np.asarray(z), np.asarray(zeta)
    out = 0
    for (m, n, p), d in delta.items():
        out = out + d * lam ** (m - p) * z**n * zeta ** (2 * p)
    return out


def low_frequency_symbol(data: "ModulationData", lam: complex, xi: float, eta_sq: float) -> complex:
    """``det(lambda Sigma_t - (e^{i xi} - 1) I + (eta^2/lambda) Sigma_y)``."""
    M = lam * data.Sigma_t - (np.exp(1j * xi) - 1.0) * np.eye(4) + (eta_sq / lam) * data.Sigma_y
    return complex(np.linalg.det(M))


def _check_nonsingular(hess: np.ndarray, rel: float = 1e-12) -> np.ndarray:
    ev = np.linalg.eigvalsh(0.5 * (hess + hess.T))
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.min(np.abs(ev)) <= rel * scale:
        raise SingularHessian("Hess Theta is singular", eigenvalues=ev.tolist())
    return ev


def characteristic_speeds(hess: np.ndarray, k_x: float, c_x: float = 0.0, tol: float = 1e-8):
    """Eigenvalues ``a`` of ``(k_x A0 H)^{-1} B0`` and the weak hyperbolicity flag.

    Returns ``(speeds, weakly_hyperbolic, whitham_speeds)``; the last entry is
    ``a - c_x``, the characteristic speeds of the modulation system in the
    laboratory frame.
    """
    M = k_x * A0 @ hess
    _check_nonsingular(hess)
    a = np.linalg.eigvals(np.linalg.solve(M, B0))
    a = a[np.lexsort((a.imag, a.real))]
    hyper = bool(np.all(np.abs(a.imag) <= tol * (1.0 + np.abs(a))))
    return a, hyper, a - c_x


def assemble(hess: np.ndarray, averages: Averages, k_x: float, c_x: float = 0.0) -> ModulationData:
    """Build every modulation object from ``Hess Theta`` and the averages."""
    hess = np.asarray(hess, dtype=float)
    if np.max(np.abs(hess - hess.T)) > 1e-6 * max(1.0, np.max(np.abs(hess))):
        raise ValueError("hess must be symmetric")
    C0 = C0_matrix(averages.sigma1, averages.sigma2, averages.sigma3)
    delta, low, imag_res = delta_coefficients(hess, C0)
    try:
        speeds, _, _ = characteristic_speeds(hess, k_x, c_x)
    except SingularHessian:
        speeds = np.full(4, np.nan + 0j)
    return ModulationData(
        A0=A0.copy(),
        B0=B0.copy(),
        C0=C0,
        Sigma_t=P1 @ A0 @ hess @ P2,
        Sigma_y=P1 @ C0 @ P2,
        delta=delta,
        char_speeds=speeds,
        hess=hess,
        k_x=k_x,
        low_order_residual=low,
        imag_residual=imag_res,
    )


# ---------------------------------------------------------------------------
# Criteria


def coperiodic_criterion(hess: np.ndarray) -> dict:
    """Parity of the unstable co-periodic count from ``det Hess Theta`` and its signature."""
    hess = np.asarray(hess, dtype=float)
    ev = _check_nonsingular(hess)
    det = float(np.prod(ev))
    neg = int(np.sum(ev < 0))
    if det < 0:
        verdict = UNSTABLE
    elif neg == 2 and hess[0, 0] != 0.0:
        verdict = STABLE_CANDIDATE
    else:
        verdict = INCONCLUSIVE
    return {
        "det": det,
        "det_sign": int(np.sign(det)),
        "negative_signature": neg,
        "eigenvalues": ev.tolist(),
        "verdict": verdict,
    }


def _quartic_in_lambda(delta: dict, z: complex, zeta: float) -> np.ndarray:
    """Coefficients (highest first) of ``lambda -> Delta0(lambda, z, zeta)``."""
    c = np.zeros(5, dtype=complex)
    for (m, n, p), d in delta.items():
        c[4 - (m - p)] += d * z**n * zeta ** (2 * p)
    return c


def _max_growth(delta: dict, xi: float, zeta: float) -> tuple[float, complex]:
    c = _quartic_in_lambda(delta, 1j * xi, zeta)
    nz = np.nonzero(np.abs(c) > 1e-14 * np.max(np.abs(c)))[0]
    if nz.size == 0:
        return 0.0, 0j
    roots = np.roots(c[nz[0]:])
    if roots.size == 0:
        return 0.0, 0j
    k = int(np.argmax(roots.real))
    return float(roots[k].real), complex(roots[k])


def transverse_criteria(data, n_directions: int = 720, tol_rel: float = 1e-7) -> dict:
    """The co-periodic transverse inequalities and the full low-frequency scan.

    ``data`` is a :class:`ModulationData` or a bare ``delta`` mapping.  The full
    scan solves ``Delta0(lambda, i xi, zeta) = 0`` on directions
    ``(xi, zeta) = (cos t, sin t)``, ``t`` in ``[0, pi]``, and refines four-fold
    around the worst direction.
    """
    delta = data.delta if isinstance(data, ModulationData) else dict(data)
    d400 = delta.get((4, 0, 0), 0.0)
    d301 = delta.get((3, 0, 1), 0.0)
    d202 = delta.get((2, 0, 2), 0.0)
    ineq = [d400 >= 0, d301 >= 2 * math.sqrt(abs(d400 * d202)), d202 >= 0]
    xi0 = {
        "delta400": d400,
        "delta301": d301,
        "delta202": d202,
        "inequalities_hold": bool(all(ineq)),
        "verdict": NO_INSTABILITY if all(ineq) else UNSTABLE,
    }

    ts = np.linspace(0.0, np.pi, n_directions + 1)
    worst = (-np.inf, 0.0, 0.0, 0j)
    worst_transverse = (-np.inf, 0.0, 0.0, 0j)
    growth = np.empty(ts.size)
    for i, t in enumerate(ts):
        xi, zeta = math.cos(t), math.sin(t)
        g, lam = _max_growth(delta, xi, zeta)
        growth[i] = g / max(1.0, abs(lam))
        if g > worst[0]:
            worst = (g, xi, zeta, lam)
        if abs(zeta) > 1e-8 and g > worst_transverse[0]:
            worst_transverse = (g, xi, zeta, lam)
    # Refinement around the worst transverse direction.
    i = int(np.argmax(np.where(np.abs(np.sin(ts)) > 1e-8, growth, -np.inf)))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    for t in np.linspace(lo, hi, 4 * 2 + 1):
        xi, zeta = math.cos(t), math.sin(t)
        if abs(zeta) <= 1e-8:
            continue
        g, lam = _max_growth(delta, xi, zeta)
        if g > worst_transverse[0]:
            worst_transverse = (g, xi, zeta, lam)
        if g > worst[0]:
            worst = (g, xi, zeta, lam)

    def unstable(entry):
        return entry[0] > tol_rel * max(1.0, abs(entry[3]))

    def pack(entry):
        return {"xi": entry[1], "zeta": entry[2], "lambda": [entry[3].real, entry[3].imag], "growth": entry[0]}

    directions = []
    if unstable(worst):
        directions.append(pack(worst))
    if unstable(worst_transverse) and worst_transverse is not worst:
        directions.append(pack(worst_transverse))
    full = {
        "unstable_directions": directions,
        "transverse_witness": pack(worst_transverse) if unstable(worst_transverse) else None,
        "max_growth": float(worst[0]),
        "n_directions": int(n_directions),
        "verdict": UNSTABLE if unstable(worst) else NO_INSTABILITY,
    }
    return {"transverse_xi0": xi0, "transverse_full": full}


def _clusters(values: np.ndarray, rel: float) -> list[tuple[complex, int]]:
    used = np.zeros(len(values), dtype=bool)
    out = []
    for i, v in enumerate(values):
        if used[i]:
            continue
        close = np.abs(values - v) <= rel * max(1.0, abs(v))
        close &= ~used
        used |= close
        out.append((complex(np.mean(values[close])), int(close.sum())))
    return out


def splitting_criteria(data: ModulationData, hess: Optional[np.ndarray] = None, k_x: Optional[float] = None, cluster_rel: float = 1e-6, tol: float = 1e-9) -> dict:
    """Hypothesis checks and verdicts of the two root-splitting criteria.

    Near ``eta = 0``: at a real eigenvalue ``w0`` of ``Sigma_t^{-1}`` of multiplicity
    ``r0 >= 2``, let ``N = d121 + d211 w0 + d301 w0^2``.  For ``r0 >= 3`` a nonzero
    ``N`` is unstable; for ``r0 = 2`` so is a negative ratio of ``N`` to the
    ``r0``-th Taylor coefficient of ``lambda -> Delta0(lambda, 1, 0)`` at ``w0``.

    Near ``xi = 0``: when ``d301^2 = 4 d400 d202``, a nonzero
    ``d211 d400 - d301 d310 / 2`` is unstable.
    """
    d = data.delta
    try:
        w = np.linalg.eigvals(np.linalg.inv(data.Sigma_t))
    except np.linalg.LinAlgError:
        w = np.array([])
    eta0_entries = []
    verdict_eta0 = NOT_APPLICABLE
    c = _quartic_in_lambda(d, 1.0, 0.0)
    for w0, r0 in _clusters(w, cluster_rel):
        if r0 < 2 or abs(w0.imag) > cluster_rel * max(1.0, abs(w0)):
            continue
        w0 = w0.real
        N = d.get((1, 2, 1), 0.0) + d.get((2, 1, 1), 0.0) * w0 + d.get((3, 0, 1), 0.0) * w0**2
        entry = {"omega0": w0, "multiplicity": r0, "N": N}
        scale = 1.0 + sum(abs(v) for v in d.values())
        if r0 >= 3:
            entry["verdict"] = UNSTABLE if abs(N) > tol * scale else INCONCLUSIVE
        else:
            poly = np.poly1d(c.real)
            taylor = poly.deriv(r0)(w0) / math.factorial(r0)
            entry["taylor"] = float(taylor)
            if taylor == 0 or abs(N) <= tol * scale:
                entry["verdict"] = INCONCLUSIVE
            else:
                ratio = N / taylor
                entry["ratio"] = float(ratio)
                entry["verdict"] = UNSTABLE if ratio < 0 else INCONCLUSIVE
        eta0_entries.append(entry)
        if entry["verdict"] == UNSTABLE:
            verdict_eta0 = UNSTABLE
        elif verdict_eta0 == NOT_APPLICABLE:
            verdict_eta0 = INCONCLUSIVE

    d400, d301, d202 = d.get((4, 0, 0), 0.0), d.get((3, 0, 1), 0.0), d.get((2, 0, 2), 0.0)
    disc = d301**2 - 4 * d400 * d202
    scale = max(1.0, d301**2, abs(4 * d400 * d202))
    xi0 = {"discriminant": disc}
    if abs(disc) > tol * scale:
        xi0["verdict"] = NOT_APPLICABLE
    else:
        crit = d.get((2, 1, 1), 0.0) * d400 - 0.5 * d.get((3, 1, 0), 0.0) * d301
        xi0["criterion"] = crit
        xi0["verdict"] = UNSTABLE if abs(crit) > tol * max(1.0, abs(d400 * d301)) else INCONCLUSIVE
    return {
        "eta0_criterion": {"clusters": eta0_entries, "verdict": verdict_eta0},
        "xi0_criterion": xi0,
    }
