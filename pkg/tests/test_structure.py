import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddholder import structure as sc


def test_prototype_flux_examples():
    f = sc.prototype_flux(2, 3)
    np.testing.assert_allclose(f(None, None, 2.0, np.array([1.0, 0.0])), [4.0, 0.0])
    g = sc.prototype_flux(1, 2)
    np.testing.assert_allclose(g(None, None, 5.0, np.array([0.0, 3.0])), [0.0, 3.0])


def test_prototype_flux_degenerate_set():
    for m in (1.5, 2.0, 4.0):
        f = sc.prototype_flux(m, 3)
        assert np.all(f(None, None, 0.0, np.array([0.3, -2.0])) == 0)
        assert np.all(f(None, None, 1.2, np.zeros(2)) == 0)


def test_validate_prototype_passes_with_unit_ratios():
    flux = sc.flux_from_config({"kind": "prototype", "m": 2, "p": 3})
    rep = sc.validate_structure(flux, sc.SampleSpec(n_dim=2))
    assert rep.passed
    assert rep.min_ellipticity_ratio == pytest.approx(1, abs=1e-12)
    assert rep.max_growth_ratio == pytest.approx(1, abs=1e-12)


def test_validate_scaled_prototype():
    xs = np.linspace(-1, 1, 11)
    vals = 0.5 + 1.5 * (xs + 1) / 2
    flux = sc.flux_from_config({"kind": "scaled", "m": 2, "p": 3, "coef_x": xs.tolist(),
                                "coef_values": vals.tolist(), "c1": 0.5, "c2": 2.0})
    assert sc.validate_structure(flux).passed


def test_validate_deliberate_violation():
    flux = sc.flux_from_config({"kind": "prototype", "m": 2, "p": 3, "c1": 1.5})
    rep = sc.validate_structure(flux)
    assert not rep.passed
    assert rep.min_ellipticity_ratio == pytest.approx(1, abs=1e-12)
    assert rep.violations
    with pytest.raises(sc.SampleFailure):
        sc.validate_structure(flux, raise_on_failure=True)


def test_oscillation_constant_coefficients():
    flux = sc.flux_from_config({"kind": "prototype", "m": 2, "p": 3})
    assert sc.oscillation_theta(flux, 2, (0.3, -0.2), (-0.5, -0.9)) == 0


def test_oscillation_linear_coefficient():
    m = 2.0
    flux = sc.FluxField(a_fn=sc.scaled_flux(sc.prototype_flux(m, 3),
                                            lambda x, t: np.asarray(x)[..., 0]),
                        c1=0.1, c2=1.0, law=sc.CoefficientLaw.power(m), p=3)
    got = sc.oscillation_theta(flux, m, (0.7, 0.0), (0.2, 0.0))
    assert got == pytest.approx(0.5 * m, rel=1e-12)
    assert sc.oscillation_theta(flux, m, (0.7, 0.0), (0.7, 0.0)) == 0


def test_oscillation_bound_uses_modulus():
    xs = [-1.0, 1.0]
    flux = sc.flux_from_config({"kind": "scaled", "m": 2, "p": 3, "coef_x": xs,
                                "coef_values": [0.5, 1.5]})
    assert flux.c_osc == pytest.approx(1.0)
    assert sc.oscillation_bound(flux, (0.3, 0.0), (0.0, -0.4)) == pytest.approx(0.5)
    assert sc.oscillation_theta(flux, 2, (0.3, 0.0), (0.0, -0.4)) <= \
        sc.oscillation_bound(flux, (0.3, 0.0), (0.0, -0.4)) * (1 + 1e-12)


def test_coefficient_law():
    assert sc.CoefficientLaw.power(2.5).check()
    with pytest.raises(ValueError):
        sc.CoefficientLaw(lambda s: s, 2, 2.0, 1.0, 1.0, 1.0, 1.0)


def test_flux_config_errors():
    with pytest.raises(ValueError):
        sc.flux_from_config({"kind": "bogus", "m": 2, "p": 3})


def test_report_dict():
    flux = sc.flux_from_config({"kind": "prototype", "m": 1, "p": 2})
    d = sc.validate_structure(flux).to_dict()
    assert d["passed"] and d["n_samples"] > 0


@settings(max_examples=30, deadline=None)
@given(st.floats(1, 4), st.floats(2, 5), st.integers(1, 3), st.integers(0, 1000))
def test_prototype_always_passes(m, p, n_dim, seed):
    flux = sc.flux_from_config({"kind": "prototype", "m": m, "p": p})
    rep = sc.validate_structure(flux, sc.SampleSpec(n_dim=n_dim, seed=seed, n_points=4))
    assert rep.passed


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10))
def test_ratios_scale_linearly(c):
    base = sc.prototype_flux(2, 3)
    flux = sc.FluxField(a_fn=sc.scaled_flux(base, lambda x, t: c), c1=c, c2=c,
                        law=sc.CoefficientLaw.power(2), p=3)
    rep = sc.validate_structure(flux, sc.SampleSpec(n_points=4))
    assert rep.min_ellipticity_ratio == pytest.approx(c, rel=1e-12)
    assert rep.max_growth_ratio == pytest.approx(c, rel=1e-12)
