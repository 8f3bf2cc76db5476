import numpy as np
import pytest

from fbm_infoflow import sigma as sg
from fbm_infoflow.errors import DomainError, UnsupportedOrder


def test_sqrt1p_values_at_zero():
    s = sg.sqrt_one_plus_square()
    assert s(0.0, 0) == pytest.approx(1.0)
    assert s(0.0, 1) == pytest.approx(0.0)


def test_constant_second_derivative_zero():
    s = sg.constant(2.0)
    assert s(5.0, 2) == 0.0


def test_constant_eval_everywhere():
    s = sg.constant(3.5, domain=(-100, 100))
    xs = np.linspace(-100, 100, 17)
    assert np.all(s(xs) == 3.5)


def test_identity_channel_is_unit():
    s = sg.identity_channel()
    assert s.kind == "identity"
    assert s(123.0) == 1.0
    assert s(123.0, 1) == 0.0


@pytest.mark.parametrize("model", [
    sg.constant(0.5), sg.constant(2.0), sg.identity_channel(),
    sg.sqrt_one_plus_square(),
])
def test_derivatives_match_finite_differences(model):
    rng = np.random.default_rng(7)
    xs = rng.uniform(-50.0, 50.0, 64)
    f = lambda x: np.asarray(model.fn(x))
    for order, h in ((1, 1e-6), (2, 1e-4)):
        hh = h * (1.0 + np.abs(xs))
        if order == 1:
            fd = (f(xs + hh) - f(xs - hh)) / (2 * hh)
        else:
            fd = (f(xs + hh) - 2 * f(xs) + f(xs - hh)) / hh ** 2
        analytic = np.array([model(x, order) for x in xs])
        assert np.all(np.abs(fd - analytic) <= 1e-6 * (1.0 + np.abs(analytic)))


def test_out_of_domain_raises():
    s = sg.sqrt_one_plus_square(domain=(-10, 10))
    with pytest.raises(DomainError):
        s(11.0)


def test_order_three_raises():
    s = sg.constant(1.0)
    with pytest.raises(UnsupportedOrder):
        s(0.0, 3)


def test_positivity_violation_rejected_at_construction():
    with pytest.raises(DomainError):
        sg.custom(
            fn=lambda x: np.asarray(x, float),      # hits zero at the origin
            d1=lambda x: np.ones_like(np.asarray(x, float)),
            d2=lambda x: np.zeros_like(np.asarray(x, float)),
            domain=(-5, 5),
        )


def test_custom_requires_analytic_derivatives():
    with pytest.raises(DomainError):
        sg.custom(fn=lambda x: 1.0 + 0 * np.asarray(x), d1=None, d2=None,
                  domain=(-1, 1))


def test_custom_wrong_derivative_rejected():
    with pytest.raises(DomainError):
        sg.custom(
            fn=lambda x: np.exp(np.asarray(x, float)),
            d1=lambda x: 2.0 * np.exp(np.asarray(x, float)),   # wrong factor
            d2=lambda x: np.exp(np.asarray(x, float)),
            domain=(-1, 1),
        )
