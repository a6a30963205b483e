"""Equation data: the dispersion coefficient kappa and the potential W.

Both are polynomials in alpha = |U|^2, stored low-degree-first, so every
derivative needed downstream is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import EmptyCoefficients, KappaNotPositive, OrderTooHigh

__all__ = ["ModelSpec", "make_model", "evaluate", "shift_transverse_phase"]

_WHICH = ("kappa", "W", "kappa_transverse")


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = [float(v) for v in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class ModelSpec:
    """Immutable polynomial model.

    Attributes
    ----------
    kappa, W : tuple of float
        Coefficients, low degree first.
    kappa_transverse : tuple of float or None
        Coefficient of the transverse dispersion; ``None`` means "same as kappa".
    alpha_max : float
        Upper end of the declared working range ``[0, alpha_max]``.
    max_derivative_order : int
        Highest derivative order :func:`evaluate` will serve.
    """

    kappa: tuple[float, ...]
    W: tuple[float, ...]
    kappa_transverse: Optional[tuple[float, ...]] = None
    alpha_max: float = 10.0
    max_derivative_order: int = 4

    def coeffs(self, which: str) -> np.ndarray:
        if which == "kappa":
            return np.asarray(self.kappa)
        if which == "W":
            return np.asarray(self.W)
        if which == "kappa_transverse":
            kt = self.kappa if self.kappa_transverse is None else self.kappa_transverse
            return np.asarray(kt)
        raise ValueError(f"unknown coefficient family {which!r}; expected one of {_WHICH}")

    def derivative_coeffs(self, which: str, order: int) -> np.ndarray:
        if order > self.max_derivative_order:
            raise OrderTooHigh(f"order {order} exceeds {self.max_derivative_order}", order=order)
        c = self.coeffs(which)
        return P.polyder(c, order) if order else c

    # Small convenience accessors used in inner loops.
    def kappa_at(self, alpha, order: int = 0):
        return P.polyval(alpha, self.derivative_coeffs("kappa", order))

    def W_at(self, alpha, order: int = 0):
        return P.polyval(alpha, self.derivative_coeffs("W", order))

    def kappa_t_at(self, alpha, order: int = 0):
        return P.polyval(alpha, self.derivative_coeffs("kappa_transverse", order))


def _min_on_interval(coeffs: np.ndarray, lo: float, hi: float) -> float:
    """Exact minimum of a polynomial on [lo, hi] via its critical points."""
    candidates = [lo, hi]
    d = P.polyder(coeffs)
    if d.size and np.any(d != 0):
        for r in P.polyroots(d) if d.size > 1 else []:
            if abs(r.imag) < 1e-12 and lo < r.real < hi:
                candidates.append(r.real)
    return float(min(P.polyval(np.array(candidates), coeffs)))


def make_model(
    kappa_coeffs: Sequence[float],
    W_coeffs: Sequence[float],
    kappa_transverse_coeffs: Optional[Sequence[float]] = None,
    alpha_max: float = 10.0,
) -> ModelSpec:
    """Build a :class:`ModelSpec`, checking that kappa stays positive on the range."""
    if kappa_coeffs is None or len(kappa_coeffs) == 0:
        raise EmptyCoefficients("kappa coefficient list is empty")
    if W_coeffs is None or len(W_coeffs) == 0:
        raise EmptyCoefficients("W coefficient list is empty")
    if kappa_transverse_coeffs is not None and len(kappa_transverse_coeffs) == 0:
        raise EmptyCoefficients("kappa_transverse coefficient list is empty")
    if not alpha_max > 0:
        raise ValueError("alpha_max must be positive")
    kappa = _trim(kappa_coeffs)
    lowest = _min_on_interval(np.asarray(kappa), 0.0, float(alpha_max))
    # Sampling guards against root-finding trouble on high-degree inputs.
    grid = np.linspace(0.0, alpha_max, 257)
    lowest = min(lowest, float(P.polyval(grid, kappa).min()))
    if lowest <= 0.0:
        raise KappaNotPositive(
            f"kappa reaches {lowest:.6g} on [0, {alpha_max}]", minimum=lowest
        )
    kt = None if kappa_transverse_coeffs is None else _trim(kappa_transverse_coeffs)
    return ModelSpec(kappa=kappa, W=_trim(W_coeffs), kappa_transverse=kt, alpha_max=float(alpha_max))


def evaluate(model: ModelSpec, which: str, alpha, order: int = 0):
    """Exact ``order``-th derivative of ``kappa``, ``W`` or ``kappa_transverse`` at ``alpha``."""
    return P.polyval(alpha, model.derivative_coeffs(which, order))


# The operation is called ``eval`` in the interface description.
eval = evaluate  # noqa: A001


def shift_transverse_phase(model: ModelSpec, ktil_norm_sq: float) -> ModelSpec:
    """Effective model for a nonzero transverse phase wavevector.

    Returns a copy whose potential is ``W(a) + 0.5 * ktil_norm_sq * a * kappa(a)``.
    """
    if ktil_norm_sq < 0:
        raise ValueError("ktil_norm_sq must be nonnegative")
    extra = 0.5 * ktil_norm_sq * P.polymulx(np.asarray(model.kappa))
    return replace(model, W=_trim(P.polyadd(np.asarray(model.W), extra)))
