import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavestab.errors import EmptyCoefficients, KappaNotPositive, OrderTooHigh
from wavestab.model import evaluate, make_model, shift_transverse_phase
from wavestab import model as model_mod


def test_reference_models_build(ref, refd):
    assert ref.kappa == (1.0,) and ref.W == (0.0, 0.0, -0.125)
    assert refd.W == (0.0, 0.0, 0.125)


def test_nonpositive_kappa_rejected():
    with pytest.raises(KappaNotPositive):
        make_model([-1], [0])


def test_kappa_root_inside_range_rejected():
    # 1 - alpha vanishes at alpha = 1 < alpha_max
    with pytest.raises(KappaNotPositive):
        make_model([1, -1], [0], alpha_max=2.0)
    make_model([1, -1], [0], alpha_max=0.5)


def test_empty_lists_rejected():
    with pytest.raises(EmptyCoefficients):
        make_model([], [0])
    with pytest.raises(EmptyCoefficients):
        make_model([1], [])


@pytest.mark.parametrize(
    "which, alpha, order, expected",
    [("W", 2.0, 2, -0.25), ("kappa", 3.0, 1, 0.0)],
)
def test_eval_examples_ref(ref, which, alpha, order, expected):
    assert model_mod.eval(ref, which, alpha, order) == pytest.approx(expected, abs=1e-15)


def test_eval_refd_value(refd):
    assert evaluate(refd, "W", 2.0, 0) == pytest.approx(0.5)


def test_order_cap(ref):
    with pytest.raises(OrderTooHigh):
        evaluate(ref, "W", 1.0, 5)


def test_kappa_transverse_defaults_to_kappa(kw_model):
    a = np.linspace(0, 3, 7)
    assert np.array_equal(evaluate(kw_model, "kappa_transverse", a), evaluate(kw_model, "kappa", a))


def test_shift_examples(ref):
    assert shift_transverse_phase(ref, 0.0) == ref
    shifted = shift_transverse_phase(ref, 1.0)
    assert np.allclose(shifted.W, [0, 0.5, -0.125])
    m = shift_transverse_phase(make_model([1, 1], [0], alpha_max=1.0), 2.0)
    assert np.allclose(m.W, [0, 1, 1])


def test_shift_rejects_negative(ref):
    with pytest.raises(ValueError):
        shift_transverse_phase(ref, -1.0)


coeff = st.floats(-2, 2, allow_nan=False, allow_subnormal=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=5), st.floats(0, 3), st.floats(0, 3))
def test_shift_composes_additively(W, a, b):
    base = make_model([1, 0.2, 0.1], W)
    twice = shift_transverse_phase(shift_transverse_phase(base, a), b)
    once = shift_transverse_phase(base, a + b)
    assert twice.kappa == base.kappa
    n = max(len(twice.W), len(once.W))
    pad = lambda c: np.pad(np.asarray(c), (0, n - len(c)))  # noqa: E731
    assert np.allclose(pad(twice.W), pad(once.W), rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-1, 1, allow_subnormal=False), min_size=5, max_size=5),
    st.floats(0.2, 3.0),
    st.integers(1, 4),
)
def test_derivatives_match_finite_differences(W, alpha, k):
    m = make_model([1.0, 0.3, 0.05], W)
    for which in ("kappa", "W"):
        h = 1e-3
        f = lambda s: evaluate(m, which, s, k - 1)  # noqa: E731
        d1 = (f(alpha + h) - f(alpha - h)) / (2 * h)
        d2 = (f(alpha + h / 2) - f(alpha - h / 2)) / h
        fd = (4 * d2 - d1) / 3
        exact = evaluate(m, which, alpha, k)
        assert abs(fd - exact) <= 1e-8 * max(1.0, abs(exact))
