import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import REFD_P
from wavestab.errors import VanishingModulus
from wavestab.madelung import HydroState, first_integral_residuals, from_hydro, hydro_hamiltonian, to_hydro
from wavestab.profile import WaveParams, solve_profile
from wavestab.spectral import _coefficients

sys.path.insert(0, str(Path(__file__).resolve().parent / "fixtures"))
from generate_oracles import perturb  # noqa: E402

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def test_constant_rotation_example():
    rho0, k = 0.7, 1.3
    x = np.linspace(0, 2, 41)
    theta = k * x
    U = math.sqrt(2 * rho0) * np.stack([np.cos(theta), -np.sin(theta)], axis=-1)
    U_x = k * U @ J.T
    h = to_hydro(U, U_x, x)
    assert np.allclose(h.rho, rho0, atol=1e-15)
    assert np.allclose(h.v, k, atol=1e-14)


def test_ref_profile_has_no_velocity(ref_profile):
    h = to_hydro(ref_profile.V, ref_profile.Vx, ref_profile.x_grid)
    assert np.allclose(h.rho, ref_profile.rho, atol=1e-14)
    assert np.max(np.abs(h.v)) <= 1e-14


def test_vanishing_modulus():
    U = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    with pytest.raises(VanishingModulus):
        to_hydro(U, np.ones_like(U), np.arange(3.0))


@pytest.mark.parametrize("which", ["ref", "refd"])
def test_roundtrip(which, ref_profile, refd_profile):
    prof = ref_profile if which == "ref" else refd_profile
    h = to_hydro(prof.V, prof.Vx, prof.x_grid)
    U, U_x = from_hydro(h, prof.theta[0], with_derivative=True)
    h2 = to_hydro(U, U_x, prof.x_grid)
    assert np.max(np.abs(h2.rho - h.rho)) <= 1e-10
    assert np.max(np.abs(h2.v - h.v)) <= 1e-10


def test_theta0_rotates(refd_profile):
    h = to_hydro(refd_profile.V, refd_profile.Vx, refd_profile.x_grid)
    t0 = 0.8
    R = np.array([[math.cos(t0), math.sin(t0)], [-math.sin(t0), math.cos(t0)]])  # e^{t0 J}
    assert np.allclose(from_hydro(h, t0), from_hydro(h, 0.0) @ R.T, atol=1e-15)


def test_hamiltonian_constant_state(refd):
    # rho0 = 1, v = 0.5, no gradient: kappa rho v^2 + W(2)
    assert hydro_hamiltonian(refd, 1.0, 0.5, 0.0) == pytest.approx(0.25 + 0.5)


@pytest.mark.parametrize("which", ["ref", "refd", "kw"])
def test_first_integrals_hold(which, ref, refd, kw_model, ref_profile, refd_profile):
    model, prof = {
        "ref": (ref, ref_profile),
        "refd": (refd, refd_profile),
        "kw": (kw_model, solve_profile(kw_model, WaveParams(-0.45, 0.1, -0.9, 0.05))),
    }[which]
    r = first_integral_residuals(model, prof)
    assert r["max_mu_phi"] <= 1e-8 and r["max_mu_x"] <= 1e-8
    assert r["route_gap"] <= 1e-10


def test_perturbed_profile_detected(ref, ref_profile, oracles):
    r = first_integral_residuals(ref, perturb(ref_profile, oracles["perturbed_residual"]["amplitude"]))
    assert max(r["max_mu_phi"], r["max_mu_x"]) >= 1e-4
    assert r["max_mu_x"] == pytest.approx(oracles["perturbed_residual"]["max_mu_x"], rel=1e-6)
    assert r["route_gap"] <= 1e-10


def _integrals(model, p, V, Vx):
    a = V @ V
    k = model.kappa_at(a)
    return np.array([k * (J @ V) @ Vx + 0.5 * p.c_x * a, 0.5 * k * Vx @ Vx - model.W_at(a) + 0.5 * p.omega_phi * a])


def test_linearized_noether(refd, refd_profile):
    # both first integrals are stationary along the two kernel directions
    p = REFD_P
    for i in range(0, len(refd_profile.x_grid), 37):
        V, Vx = refd_profile.V[i], refd_profile.Vx[i]
        Vxx = _coefficients(refd, p, V, Vx)[0]
        for psi, psix in ((J @ V, J @ Vx), (Vx, Vxx)):
            h = 1e-6
            d = (_integrals(refd, p, V + h * psi, Vx + h * psix) - _integrals(refd, p, V - h * psi, Vx - h * psix)) / (2 * h)
            assert np.max(np.abs(d)) <= 1e-7


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(0.1, 3.0), min_size=8, max_size=8),
    st.lists(st.floats(-2.0, 2.0), min_size=8, max_size=8),
    st.floats(-math.pi, math.pi),
)
def test_from_to_roundtrip_random(rhos, vs, t0):
    x = np.linspace(0.0, 1.0, 8)
    state = HydroState(np.array(rhos), np.array(vs), x, rho_x=np.zeros(8))
    U, U_x = from_hydro(state, t0, with_derivative=True)
    back = to_hydro(U, U_x, x)
    assert np.allclose(back.rho, rhos, rtol=1e-12)
    assert np.allclose(back.v, vs, atol=1e-12)
