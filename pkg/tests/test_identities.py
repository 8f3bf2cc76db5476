import numpy as np
import pytest

from fbm_infoflow import channels as ch, identities as idn, infofunc as nf, sigma as sg
from fbm_infoflow.errors import DomainError, StepError


def test_constant_sigma_entropy_flow_is_h_over_t():
    # h(X_t) = 0.5 ln(2 pi e c^2 t^{2H}) so dh/dt = H/t; sigma-derivative
    # terms vanish and J_{sigma^2} = t^{-2H}
    for c_val in (0.5, 2.0):
        for h in (0.25, 0.75):
            chan = ch.multiplicative(sg.constant(c_val), 0.0, h)
            rep = idn.debruijn_check_mult(chan, 1.0, tol=1e-6)
            assert rep.passed
            assert rep.rhs == pytest.approx(h, abs=1e-10)
            assert rep.lhs == pytest.approx(h, abs=1e-6)


def test_unit_sigma_brownian_remark():
    # H = 1/2, sigma = 1: rhs reduces to J_1(X_t) / 2
    chan = ch.multiplicative(sg.constant(1.0), 0.0, 0.5)
    rep = idn.debruijn_check_mult(chan, 1.0, tol=1e-6)
    j1 = nf.generalized_fisher(ch.density_at(chan, 1.0))
    assert rep.rhs == pytest.approx(0.5 * j1, abs=1e-12)


def test_nonconstant_sigma_debruijn():
    chan = ch.multiplicative(sg.sqrt_one_plus_square(), 0.0, 0.75)
    rep = idn.debruijn_check_mult(chan, 1.0, fd_step=1e-3, tol=1e-4)
    assert rep.passed
    assert rep.abs_discrepancy <= 1e-4


def test_rhs_cross_check_tight():
    chan = ch.multiplicative(sg.sqrt_one_plus_square(), 0.0, 0.6)
    rep = idn.debruijn_check_mult(chan, 1.0)
    assert rep.extras["rhs_cross_check"] <= 1e-9


def test_report_invariant():
    chan = ch.multiplicative(sg.constant(1.0), 0.0, 0.5)
    rep = idn.debruijn_check_mult(chan, 1.0, tol=1e-6)
    assert rep.abs_discrepancy == abs(rep.lhs - rep.rhs)
    assert rep.passed == (rep.abs_discrepancy <= rep.tolerance)


def test_step_error():
    chan = ch.multiplicative(sg.constant(1.0), 0.0, 0.5)
    with pytest.raises(StepError):
        idn.debruijn_check_mult(chan, 0.5, fd_step=0.6)


def test_wrong_variant_rejected():
    add = ch.additive(ch.gaussian_law(0, 1), 0.5)
    mult = ch.multiplicative(sg.constant(1.0), 0.0, 0.5)
    with pytest.raises(DomainError):
        idn.debruijn_check_mult(add, 1.0)
    with pytest.raises(DomainError):
        idn.debruijn_check_additive(mult, 1.0)
    with pytest.raises(DomainError):
        idn.entropy_power_profile(mult, [1.0])


def test_additive_gaussian_rhs_value():
    chan = ch.additive(ch.gaussian_law(0.0, 1.0), 0.75)
    rep = idn.debruijn_check_additive(chan, 1.0, tol=1e-6)
    assert rep.rhs == pytest.approx(0.375, abs=1e-12)
    assert rep.passed
    chan2 = ch.additive(ch.gaussian_law(0.0, 1.0), 0.5)
    rep2 = idn.debruijn_check_additive(chan2, 1.0, tol=1e-6)
    assert rep2.rhs == pytest.approx(0.25, abs=1e-12)


def test_additive_grid_law():
    grid = np.linspace(-1, 1, 2001)
    chan = ch.additive(ch.grid_law(grid, np.full(grid.size, 0.5)), 0.3)
    rep = idn.debruijn_check_additive(chan, 0.5, tol=1e-4)
    assert rep.passed, rep


def test_kl_flow_same_start_is_zero():
    s = sg.constant(1.0)
    x = ch.multiplicative(s, 0.0, 0.6)
    y = ch.multiplicative(s, 0.0, 0.6)
    rep = idn.kl_flow_check(x, y, 1.0, tol=1e-8)
    assert rep.lhs == pytest.approx(0.0, abs=1e-8)
    assert rep.rhs == pytest.approx(0.0, abs=1e-12)


def test_kl_flow_gaussian_value():
    s = sg.constant(1.0)
    x = ch.multiplicative(s, 0.0, 0.75)
    y = ch.multiplicative(s, 1.0, 0.75)
    rep = idn.kl_flow_check(x, y, 1.0, tol=1e-5)
    assert rep.rhs == pytest.approx(-0.75, abs=1e-12)
    assert rep.passed
    assert rep.extras["monotone"]
    assert rep.rhs <= 0.0


def test_kl_strictly_decreasing_closed_form():
    s = sg.constant(1.0)
    for h in (0.3, 0.5, 0.75):
        x = ch.multiplicative(s, 0.0, h)
        y = ch.multiplicative(s, 1.0, h)
        kls = [nf.kl_divergence(ch.density_at(x, t), ch.density_at(y, t))
               for t in (0.5, 1.0, 2.0)]
        expected = [1.0 / (2 * t ** (2 * h)) for t in (0.5, 1.0, 2.0)]
        assert np.allclose(kls, expected, atol=1e-12)
        assert kls[0] > kls[1] > kls[2]


def test_kl_flow_nonconstant_sigma():
    s = sg.sqrt_one_plus_square()
    x = ch.multiplicative(s, 0.0, 0.6)
    y = ch.multiplicative(s, 0.5, 0.6)
    rep = idn.kl_flow_check(x, y, 1.0, tol=1e-4)
    assert rep.passed, rep
    assert rep.rhs <= 0.0


def test_fokker_planck_heat_equation():
    chan = ch.multiplicative(sg.constant(1.0), 0.0, 0.5)
    res = idn.fokker_planck_residual(chan, 1.0, np.linspace(-4, 4, 81))
    assert np.max(np.abs(res)) <= 1e-5


def test_fokker_planck_constant_two():
    chan = ch.multiplicative(sg.constant(2.0), 0.0, 0.25)
    res = idn.fokker_planck_residual(chan, 1.0, np.linspace(-4, 4, 81))
    assert np.max(np.abs(res)) <= 1e-5


def test_fokker_planck_nonconstant():
    chan = ch.multiplicative(sg.sqrt_one_plus_square(), 0.0, 0.75)
    res = idn.fokker_planck_residual(chan, 1.0, np.linspace(-4, 4, 81))
    assert np.max(np.abs(res)) <= 1e-3


def test_stein_identity_examples():
    rep = idn.stein_check(0.5, 2.0, lambda y: y, lambda y: np.ones_like(y))
    assert rep.lhs == pytest.approx(2.0, abs=1e-10)
    assert rep.rhs == pytest.approx(2.0, abs=1e-10)
    rep = idn.stein_check(0.0, 1.0, lambda y: y ** 2, lambda y: 2 * y)
    assert rep.abs_discrepancy <= 1e-10
    rep = idn.stein_check(0.0, 1.0, lambda y: y ** 3, lambda y: 3 * y ** 2)
    assert rep.lhs == pytest.approx(3.0, abs=1e-10)
    assert rep.rhs == pytest.approx(3.0, abs=1e-10)


def test_entropy_power_gaussian_h_half_linear():
    chan = ch.additive(ch.gaussian_law(0.0, 1.0), 0.5)
    prof = idn.entropy_power_profile(chan, [0.5, 1.0, 2.0])
    assert np.allclose(prof.g_values, 0.0, atol=1e-14)
    assert all(c == "concave" for c in prof.classifications)
    assert np.allclose(prof.n_values, 1.0 + np.array([0.5, 1.0, 2.0]), atol=1e-12)
    assert np.max(np.abs(prof.d2n_fd)) <= 1e-6


def test_entropy_power_g_values():
    chan = ch.additive(ch.gaussian_law(0.0, 1.0), 0.75)
    prof = idn.entropy_power_profile(chan, [1.0])
    assert prof.g_values[0] == pytest.approx(0.1875, abs=1e-12)
    assert prof.classifications[0] == "convex"
    chan = ch.additive(ch.gaussian_law(0.0, 1.0), 0.3)
    prof = idn.entropy_power_profile(chan, [1.0])
    assert prof.g_values[0] == pytest.approx(-0.06, abs=1e-12)
    assert prof.classifications[0] == "concave"


def test_entropy_power_second_difference_matches_formula():
    for h in (0.3, 0.75):
        chan = ch.additive(ch.gaussian_law(0.0, 1.0), h)
        prof = idn.entropy_power_profile(chan, [0.5, 1.0, 2.0], fd_step=1e-3)
        rel = np.abs(prof.d2n_fd - prof.d2n_formula) / np.abs(prof.d2n_formula)
        assert np.max(rel) <= 1e-4


def test_entropy_power_sign_law():
    for h in (0.6, 0.75, 0.9):
        prof = idn.entropy_power_profile(
            ch.additive(ch.gaussian_law(0.0, 1.0), h), [0.5, 1.0, 2.0])
        assert all(c == "convex" for c in prof.classifications)
    for h in (0.1, 0.3, 0.5):
        prof = idn.entropy_power_profile(
            ch.additive(ch.gaussian_law(0.0, 1.0), h), [0.5, 1.0, 2.0])
        assert all(c == "concave" for c in prof.classifications)


def test_entropy_power_profile_grid_initial():
    grid = np.linspace(-1, 1, 1001)
    chan = ch.additive(ch.grid_law(grid, np.full(grid.size, 0.5)), 0.75)
    prof = idn.entropy_power_profile(chan, [1.0], fd_step=1e-3)
    rel = abs(prof.d2n_fd[0] - prof.d2n_formula[0]) / max(1.0, abs(prof.d2n_formula[0]))
    assert rel <= 1e-2   # dJ_1/dt by FD of quadrature, looser by construction
