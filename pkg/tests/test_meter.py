import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddholder import exponents as ex
from ddholder import meter
from ddholder.solver import Dirichlet, Grid1D, SolverConfig, SpaceTimeField, solve


def _field(fn, n=200, x=(-1, 1), times=None):
    g = Grid1D(x[0], x[1], n)
    times = np.linspace(-1, 0, 201) if times is None else np.asarray(times)
    X, T = np.meshgrid(g.centers, times)
    return SpaceTimeField(g, times, fn(X, T))


def test_oscillation_constant():
    fld = _field(lambda x, t: np.full_like(x, 2.0))
    assert meter.oscillation(fld, meter.IntrinsicCylinder(0.0, 0.0, 0.5, 2.0)) == 0


def test_oscillation_linear_in_x():
    fld = _field(lambda x, t: x)
    rho = 0.3
    got = meter.oscillation(fld, meter.IntrinsicCylinder(0.0, -0.5, rho, 2.0))
    assert abs(got - 2 * rho) <= fld.grid.dx * (1 + 1e-9)


def test_oscillation_linear_in_t():
    fld = _field(lambda x, t: t, times=np.linspace(-1, 0, 1001))
    got = meter.oscillation(fld, meter.IntrinsicCylinder(0.0, 0.0, 0.1, 2.0))
    assert abs(got - 0.01) <= 1e-3


def test_empty_cylinder():
    fld = _field(lambda x, t: x, n=16, times=[-1, -0.5, 0])
    with pytest.raises(meter.EmptyCylinder):
        meter.oscillation(fld, meter.IntrinsicCylinder(0.0, 0.0, 1e-4, 2.0))


def test_seminorm_constant_zero():
    fld = _field(lambda x, t: np.full_like(x, 1.0))
    assert meter.holder_seminorm(fld, 0.5, 2.0, 0.5) == 0


def test_seminorm_scale_invariant_profile():
    a = 0.5
    n = 4000
    dx = 2 / n
    # a cell centred on the origin, so the minimum over every cylinder is 0
    g = Grid1D(-1 - dx / 2, 1 - dx / 2, n)
    fld = SpaceTimeField(g, [-1.0, 0.0], np.tile(np.abs(g.centers) ** a, (2, 1)))
    vals = [meter.holder_seminorm(fld, a, 2.0, rho, centers=[(0.0, 0.0)], n_radii=1)
            for rho in (0.5, 0.05, 0.01)]
    assert max(vals) / min(vals) <= 1.1


def test_series_truncates():
    fld = _field(lambda x, t: np.abs(x) ** 0.5, n=64)
    s = meter.lambda_adic_series(fld, (0.0, 0.0), 0.25, 1.0, 30, 2.0)
    assert s.truncated and s.radii.size < 31
    with pytest.raises(ValueError):
        meter.lambda_adic_series(fld, (0.0, 0.0), 0.5, 1.0, 3, 2.0)


def test_series_zero_field():
    fld = _field(lambda x, t: np.zeros_like(x), n=64)
    s = meter.lambda_adic_series(fld, (0.0, 0.0), 0.25, 1.0, 5, 2.0)
    assert np.all(s.osc == 0)


def test_fit_constant_no_decay():
    fld = _field(lambda x, t: np.full_like(x, 3.0), n=128)
    fit = meter.fit_alpha_theta(fld, (0.0, 0.0), 2, 3)
    assert fit.no_decay and not fit.converged


def _planted(a, m, p, n=512):
    dx = 2.0 / n
    g = Grid1D(-1 - dx / 2, 1 - dx / 2, n)
    times = np.concatenate([-np.logspace(0, -10, 500), [0.0]])
    th = ex.theta(a, m, p)
    vals = np.abs(g.centers)[None, :] ** a + np.abs(times)[:, None] ** (a / th)
    return SpaceTimeField(g, times, vals)


def test_fit_planted_half():
    fit = meter.fit_alpha_theta(_planted(0.5, 2, 3), (0.0, 0.0), 2, 3)
    assert 0.45 <= fit.alpha_emp <= 0.55 and fit.converged
    assert fit.theta_used == pytest.approx(2.0, abs=0.01)


def test_fit_heat_saturates():
    cfg = SolverConfig(t_end=0.1, bc=Dirichlet(0.0, 0.0), dt_max=1e-4, output_every=1e-4)
    fld = solve(lambda x: np.sin(np.pi * x), Grid1D(0, 1, 128), 1, 2, None, cfg)
    fit = meter.fit_alpha_theta(fld, (0.25, 0.1), 1, 2, rho0=0.25)
    assert fit.alpha_emp >= 0.9 and fit.converged
    assert fit.theta_used == pytest.approx(2.0)


def test_normalization_examples():
    npar = meter.normalization_params(2, 3, 2, 3, 4, 1.0, 0.5, 1.0, 0.0)
    assert npar.kappa0 == pytest.approx(23 / 6, abs=1e-12)
    assert npar.pi0 == 5
    assert npar.mu0 == pytest.approx(0.5 ** (6 / 23), abs=1e-12)
    assert npar.mu0 == pytest.approx(0.8346, abs=1e-3)
    assert meter.normalization_params(2, 3, 2, 3, 4, 1.0, 0.999999, 0.5, 0.0).mu0 == \
        pytest.approx(1.0, abs=1e-5)


def test_normalization_omega_option():
    base = meter.normalization_params(2, 3, 2, 3, 4, 1.0, 0.5, 1.0, 0.0)
    with_omega = meter.normalization_params(2, 3, 2, 3, 4, 1.0, 0.5, 1.0, 0.0,
                                            include_omega=True, omega_inv=lambda y: 4 * y)
    assert with_omega.mu0 <= base.mu0
    with pytest.raises(ValueError):
        meter.normalization_params(2, 3, 2, 3, 4, 1.0, 0.5, 1.0, 0.0, include_omega=True)


def test_normalization_nonpositive_kappa():
    with pytest.raises(meter.NonPositiveKappa):
        meter.normalization_params(1, 2, 10, 1.1, 1.1, 1.0, 0.5, 1.0, 0.0)


def test_rescale_identity():
    fld = _field(lambda x, t: np.sin(3 * x) + t, n=64, times=np.linspace(-1, 0, 65))
    out = meter.rescale_field(fld, 0.0, 0.0, 1.0, 0.4, 2.0, out_grid=fld.grid, out_times=fld.times)
    np.testing.assert_allclose(out.values, fld.values, atol=1e-13)


def test_rescale_round_trip():
    a, th, rho = 0.5, 2.0, 0.25

    def v(x, t):
        return np.cos(x) * np.exp(t)

    g = Grid1D(-1, 1, 800)
    times = np.linspace(-1, 0, 801)
    X, T = np.meshgrid(g.centers, times)
    fld = SpaceTimeField(g, times, rho ** a * v(X / rho, T / rho ** th))
    out = meter.rescale_field(fld, 0.0, 0.0, rho, a, th, out_grid=Grid1D(-1, 1, 40),
                              out_times=np.linspace(-1, 0, 11))
    Xo, To = np.meshgrid(out.x, out.times)
    np.testing.assert_allclose(out.values, v(Xo, To), atol=1e-3)


def test_rescale_out_of_extent():
    fld = _field(lambda x, t: x, n=32, times=np.linspace(-0.1, 0, 11))
    with pytest.raises(meter.OutOfExtent):
        meter.rescale_field(fld, 0.0, 0.0, 0.9, 0.5, 2.0)


def test_f_rescale_examples():
    m, p, n, q, r = 2.0, 3.0, 2, 3.0, 4.0
    a_star = meter.f_rescale_threshold(m, p, n, q, r)
    assert meter.f_rescale_exponent(m, p, n, q, r, a_star) == pytest.approx(0, abs=1e-12)
    want = (((p - 1) + 1) * q - n) * (r / q) - p
    assert meter.f_rescale_exponent(m, p, n, q, r, 0.0) == pytest.approx(want)
    assert want > 0
    assert meter.f_rescale_exponent(m, p, n, q, r, a_star + 0.1) < 0


def test_rho0_bound_examples():
    assert meter.rho0_lower_bound(1.0, 1.0, 3.0, 2, 3) == pytest.approx(1 / 16)
    assert meter.rho0_lower_bound(2.0, 0.5, 2.0, 2, 3) == pytest.approx(2.0 ** -15)
    vals = [meter.rho0_lower_bound(g, 0.5, 2.0, 2, 3) for g in (1, 10, 100, 1000)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))


def test_lqr_norm_examples():
    g = Grid1D(-1, 1, 200)
    # samples at the midpoints of 100 time cells covering (-1, 0]
    times = -1 + (np.arange(100) + 0.5) / 100
    c = 1.7
    fld = SpaceTimeField(g, times, np.full((100, 200), c))
    assert meter.field_lqr_norm(fld, 2, 2) == pytest.approx(c * math.sqrt(2), rel=1e-12)
    # node-based samples carry one extra half cell at each end
    nodes = SpaceTimeField(g, np.linspace(-1, 0, 101), np.full((101, 200), c))
    assert meter.field_lqr_norm(nodes, 2, 2) == pytest.approx(c * math.sqrt(2), rel=1e-2)
    assert meter.field_lqr_norm(fld, math.inf, math.inf) == c
    assert meter.field_lqr_norm(fld.scaled(0.0), 3, 5) == 0


def test_energy_zero_is_undefined():
    fld = _field(lambda x, t: np.zeros_like(x), n=32)
    rep = meter.energy_diagnostic(fld, 1, 2)
    assert rep.undefined and rep.ratio == 0


def _heat(n):
    cfg = SolverConfig(t_end=0.1, bc=Dirichlet(0.0, 0.0), dt_max=1e-4, output_every=1e-3)
    return solve(lambda x: np.sin(np.pi * x), Grid1D(0, 1, n), 1, 2, None, cfg)


def test_energy_homogeneity_and_stability():
    fld = _heat(64)
    e1 = meter.energy_diagnostic(fld, 1, 2)
    e2 = meter.energy_diagnostic(fld.scaled(2.0), 1, 2)
    assert e2.lhs == pytest.approx(4 * e1.lhs, rel=1e-12)
    assert e2.ratio == pytest.approx(e1.ratio, rel=1e-12)
    ef = meter.energy_diagnostic(_heat(128), 1, 2)
    assert 0.5 <= ef.ratio / e1.ratio <= 2


@settings(max_examples=30, deadline=None)
@given(st.floats(1, 5), st.floats(2, 5), st.integers(1, 3),
       st.floats(1.1, 100), st.floats(1.1, 100))
def test_f_rescale_vanishes_at_threshold(m, p, n, q, r):
    a = (r * (p * q - n) - p * q) / (q * ((m + p - 2) * r - (m + p - 3)))
    assert a == pytest.approx(meter.f_rescale_threshold(m, p, n, q, r), rel=1e-9, abs=1e-12)
    scale = max(1.0, r * p)
    assert abs(meter.f_rescale_exponent(m, p, n, q, r, a)) <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(st.floats(1, 5), st.floats(2, 5), st.integers(1, 3),
       st.floats(1.1, 100), st.floats(1.1, 100), st.floats(0.1, 3))
def test_kappa_positive_under_wcc(m, p, n, q, r, s):
    if not ex.check_compatibility(ex.ProblemParams(m, p, n, q, r)).wcc:
        return
    npar = meter.normalization_params(m, p, n, q, r, s, 0.5, 2.0, 1.0)
    assert npar.kappa0 > 0 and npar.pi0 > 0 and 0 < npar.mu0 <= 1


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 5))
def test_seminorm_homogeneous_in_u(c):
    fld = _field(lambda x, t: np.abs(x) ** 0.5 + t, n=64, times=np.linspace(-1, 0, 33))
    base = meter.holder_seminorm(fld, 0.5, 2.0, 0.5)
    assert meter.holder_seminorm(fld.scaled(c), 0.5, 2.0, 0.5) == pytest.approx(c * base, rel=1e-12)
