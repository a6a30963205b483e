import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import REF_P, REFD_P
from wavestab.errors import DegenerateWell, NoDualPoint, NoWellFound
from wavestab.model import make_model
from wavestab.profile import (
    WaveParams,
    effective_potential,
    nu,
    radius_ode_check,
    rho_dual,
    solve_profile,
    turning_points,
    wave_averages,
)
from wavestab.spectral import profile_state


@pytest.mark.parametrize(
    "rho, c, mph, expected", [(1.0, 0.0, 0.0, 0.0), (0.5, 0.0, 1.0, 1.0), (1.0, 2.0, 2.0, 0.0)]
)
def test_nu_examples(ref, rho, c, mph, expected):
    assert nu(ref, rho, c, mph) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("rho, order, expected", [(1.0, 0, -0.5), (0.5, 0, -0.375), (1.0, 2, 1.0)])
def test_effective_potential_examples(ref, rho, order, expected):
    assert effective_potential(ref, rho, REF_P, order) == pytest.approx(expected, abs=1e-14)


def test_effective_potential_derivatives_by_differences(kw_model):
    p = WaveParams(-0.45, 0.1, -0.9, 0.05)
    for k in range(1, 5):
        h = 1e-3
        f = lambda r: effective_potential(kw_model, r, p, k - 1)  # noqa: E731
        d1 = (f(0.8 + h) - f(0.8 - h)) / (2 * h)
        d2 = (f(0.8 + h / 2) - f(0.8 - h / 2)) / h
        assert (4 * d2 - d1) / 3 == pytest.approx(effective_potential(kw_model, 0.8, p, k), rel=1e-7)


def test_turning_points_ref(ref):
    a, b = turning_points(ref, REF_P)
    assert (a, b) == pytest.approx((0.5, 1.5), abs=1e-14)


def test_turning_points_degenerate(ref):
    with pytest.raises(DegenerateWell):
        turning_points(ref, WaveParams(-0.5, 0.0, -1.0, 0.0))


def test_turning_points_no_well(ref):
    with pytest.raises(NoWellFound):
        turning_points(ref, WaveParams(-0.6, 0.0, -1.0, 0.0))


def test_turning_points_refd_against_bisection(refd, oracles):
    o = oracles["REFD_turning"]
    a, b = turning_points(refd, WaveParams(*o["params"]))
    assert a == pytest.approx(o["rho_min"], rel=1e-13)
    assert b == pytest.approx(o["rho_max"], rel=1e-13)


def test_rho_dual(ref, refd, oracles):
    with pytest.raises(NoDualPoint):
        rho_dual(ref, REF_P)
    o = oracles["REFD_turning"]
    assert rho_dual(refd, WaveParams(*o["params"])) == pytest.approx(o["rho_dual"], rel=1e-13)


def test_rho_dual_at_harmonic_point(ref):
    with pytest.raises((NoDualPoint, DegenerateWell)):
        rho_dual(ref, WaveParams(-0.5, 0.0, -1.0, 0.0))


def test_ref_period_against_quadrature_oracle(ref_profile, oracles):
    assert ref_profile.X_x == pytest.approx(oracles["REF_wave"]["X"], rel=1e-12)
    assert ref_profile.xi_phi == 0.0 and ref_profile.k_phi == 0.0
    assert ref_profile.rho.min() == pytest.approx(0.5, abs=1e-10)
    assert ref_profile.rho.max() == pytest.approx(1.5, abs=1e-10)


def test_refd_profile_against_oracle(refd_profile, oracles):
    o = oracles["REFD_wave"]
    assert refd_profile.X_x == pytest.approx(o["X"], rel=1e-12)
    assert refd_profile.xi_phi == pytest.approx(o["xi_phi"], rel=1e-12)


@pytest.mark.parametrize("which", ["ref", "refd", "kw"])
def test_profile_invariants(which, ref, refd, kw_model):
    model, p = {
        "ref": (ref, REF_P),
        "refd": (refd, REFD_P),
        "kw": (kw_model, WaveParams(-0.45, 0.1, -0.9, 0.05)),
    }[which]
    prof = solve_profile(model, p)
    assert prof.rho[0] == prof.rho_min
    assert np.all(prof.rho >= prof.rho_min - 1e-15) and np.all(prof.rho <= prof.rho_max + 1e-15)
    assert np.all(np.diff(prof.x_grid) > 0) and prof.X_x > 0
    # first integral in (rho, rho_x)
    k = model.kappa_at(2 * prof.rho)
    res = k / (4 * prof.rho) * prof.rho_x**2 + effective_potential(model, prof.rho, p) - p.mu_x
    assert np.max(np.abs(res)) <= 1e-12
    assert np.allclose(prof.v, nu(model, prof.rho, p.c_x, p.mu_phi), rtol=0, atol=1e-15)
    # twisted periodicity
    c, s = math.cos(prof.xi_phi), math.sin(prof.xi_phi)
    E = np.array([[c, s], [-s, c]])
    assert np.allclose(prof.V[-1], E @ prof.V[0], atol=1e-12)
    # second-order radius equation as an independent check
    assert radius_ode_check(model, prof) <= 1e-9


def test_state_at_matches_grid(refd_profile):
    for i in (0, 37, 256, 300, 512):
        V, Vx = refd_profile.state_at(refd_profile.x_grid[i])
        assert np.allclose(V, refd_profile.V[i], atol=1e-12)
        assert np.allclose(Vx, refd_profile.Vx[i], atol=1e-11)


def test_profile_state_twist(refd_profile):
    x = 0.3 * refd_profile.X_x
    V0, _ = profile_state(refd_profile, x)
    V1, _ = profile_state(refd_profile, x + refd_profile.X_x)
    c, s = math.cos(refd_profile.xi_phi), math.sin(refd_profile.xi_phi)
    assert np.allclose(V1, np.array([[c, s], [-s, c]]) @ V0, atol=1e-12)


def test_reflection_symmetry(refd):
    p = WaveParams(1.2, 0.1, 1.5, 1.0)
    q = WaveParams(1.2, -0.1, 1.5, -1.0)
    a, b = solve_profile(refd, p), solve_profile(refd, q)
    assert np.allclose(a.rho, b.rho, atol=1e-13)
    assert np.allclose(a.v, -b.v, atol=1e-13)
    assert a.xi_phi == pytest.approx(-b.xi_phi, rel=1e-13)


def test_small_amplitude_period_converges(ref):
    X0 = math.pi * math.sqrt(2)
    offsets = np.array([1e-2, 1e-3, 1e-4])
    errs = [abs(solve_profile(ref, WaveParams(-0.5 + e, 0, -1, 0)).X_x - X0) for e in offsets]
    order = np.polyfit(np.log(offsets), np.log(errs), 1)[0]
    assert order >= 0.95


def test_averages_ref(ref, ref_profile, oracles):
    av = wave_averages(ref, ref_profile)
    assert av.q_bar == 0.0 and av.sigma2 == 0.0 and av.tau2 == 0.0
    assert av.m_bar == pytest.approx(oracles["REF_wave"]["m_bar"], rel=1e-12)
    assert av.sigma1 == pytest.approx(2 * av.m_bar * ref_profile.X_x, rel=1e-12)
    assert av.sigma_tau_defect(ref_profile.k_x) <= 1e-8


def test_averages_two_routes_refd(refd, refd_profile, oracles):
    av = wave_averages(refd, refd_profile)
    o = oracles["REFD_wave"]
    assert av.m_bar * refd_profile.X_x == pytest.approx(o["int_M"], rel=1e-12)
    assert av.q_bar * refd_profile.X_x == pytest.approx(o["int_Q"], rel=1e-12)
    assert av.sigma_tau_defect(refd_profile.k_x) <= 1e-8


def test_transverse_kappa_enters_sigma(ref_profile):
    # kappa_transverse = 2 doubles sigma_1 on a constant-kappa model
    m2 = make_model([1], [0, 0, -1 / 8], kappa_transverse_coeffs=[2])
    base = wave_averages(make_model([1], [0, 0, -1 / 8]), ref_profile)
    assert wave_averages(m2, ref_profile).sigma1 == pytest.approx(2 * base.sigma1, rel=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95))
def test_ref_family_turning_points_straddle_minimum(frac):
    # mu_x between the well bottom -1/2 and the local max at rho -> 0 (value 0)
    ref = make_model([1], [0, 0, -1 / 8])
    mu = -0.5 + 0.5 * frac
    a, b = turning_points(ref, WaveParams(mu, 0, -1, 0))
    assert a < 1 < b
    assert a == pytest.approx(1 - math.sqrt(1 + 2 * mu), abs=1e-12)
    assert b == pytest.approx(1 + math.sqrt(1 + 2 * mu), abs=1e-12)
