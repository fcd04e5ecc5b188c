import numpy as np
import pytest
from numpy.testing import assert_allclose

from trunca import (
    OuterPowerGenerator,
    TiltedGenerator,
    generator,
    generator_from_dict,
    generator_to_dict,
    log1mexp,
)

FAMILIES = {
    "independence": (None,),
    "clayton": (0.3, 2.0, 8.0),
    "amh": (0.0, 0.5, 0.95),
    "frank": (0.5, 4.0, 30.0),
    "gumbel": (1.0, 2.0, 8.0),
    "joe": (1.0, 2.0, 8.0),
}


def all_generators():
    out = []
    for fam, thetas in FAMILIES.items():
        for th in thetas:
            out.append(generator(fam, th))
    out.append(generator("clayton", 1.5, outer_alpha=0.6))
    out.append(generator("gumbel", 2.0, outer_alpha=0.5))
    return out


@pytest.mark.parametrize(
    "fam,theta",
    [("clayton", 0.0), ("clayton", -1.0), ("amh", 1.0), ("amh", -0.1),
     ("frank", 0.0), ("gumbel", 0.9), ("joe", 0.5)],
)
def test_parameter_range_errors(fam, theta):
    with pytest.raises(ValueError):
        generator(fam, theta)


def test_psi_point_values():
    assert_allclose(generator("clayton", 2.0).psi(6.0), 7.0**-0.5, rtol=1e-14)
    assert_allclose(generator("gumbel", 2.0).psi(1.0), np.exp(-1.0), rtol=1e-14)
    for g in all_generators():
        assert g.psi(0.0) == pytest.approx(1.0, abs=1e-14)


def test_psi_inv_point_values():
    assert_allclose(generator("clayton", 2.0).psi_inv(0.5), 3.0, rtol=1e-13)
    assert_allclose(generator("gumbel", 2.0).psi_inv(np.exp(-1.0)), 1.0, rtol=1e-13)
    for g in all_generators():
        assert g.psi_inv(1.0) == pytest.approx(0.0, abs=1e-14)
        assert np.isinf(g.psi_inv(0.0))
    with pytest.raises(ValueError):
        generator("clayton", 2.0).psi_inv(1.5)
    with pytest.raises(ValueError):
        generator("clayton", 2.0).psi_inv(-0.1)
    with pytest.raises(ValueError):
        generator("clayton", 2.0).psi(-1.0)


def test_roundtrip_psi_psi_inv():
    rng = np.random.default_rng(1)
    for g in all_generators():
        u = rng.uniform(1e-4, 1.0, size=1000)
        assert np.max(np.abs(np.asarray(g.psi(g.psi_inv(u))) - u)) <= 1e-12


def test_roundtrip_extreme_theta():
    # stability spot checks where naive forms cancel
    g = generator("frank", 50.0)
    u = np.array([1e-8, 1e-3, 0.2, 0.9, 1.0 - 1e-6])
    assert np.max(np.abs(np.asarray(g.psi(g.psi_inv(u))) - u)) <= 1e-12
    g = generator("joe", 20.0)
    assert np.max(np.abs(np.asarray(g.psi(g.psi_inv(u))) - u)) <= 1e-12


def test_derivative_point_values():
    assert_allclose(generator("clayton", 2.0).psi_deriv(6.0, 1), -0.5 * 7.0**-1.5, rtol=1e-13)
    assert_allclose(generator("independence").psi_deriv(1.0, 1), -np.exp(-1.0), rtol=1e-14)
    assert_allclose(generator("clayton", 2.0).psi_deriv(0.0, 2), 0.75, rtol=1e-14)
    with pytest.raises(ValueError):
        generator("clayton", 2.0).psi_deriv(1.0, order=3)


def test_derivatives_match_finite_differences():
    ts = np.geomspace(1e-3, 50.0, 40)
    step = np.minimum(1.2e-3, np.maximum(3e-4 * ts, 1e-7))
    for g in all_generators():
        d1 = np.asarray(g.psi_deriv(ts, 1))
        fd1 = (np.asarray(g.psi(ts + step)) - np.asarray(g.psi(ts - step))) / (2 * step)
        assert np.max(np.abs(d1 - fd1) / np.abs(d1)) <= 1e-6, g
        d2 = np.asarray(g.psi_deriv(ts, 2))
        fd2 = (np.asarray(g.psi_deriv(ts + step, 1)) - np.asarray(g.psi_deriv(ts - step, 1))) / (2 * step)
        assert np.max(np.abs(d2 - fd2) / np.abs(d2)) <= 1e-5, g


def test_derivative_sign_pattern():
    ts = np.geomspace(1e-3, 50.0, 25)
    for g in all_generators():
        assert np.all(np.asarray(g.psi_deriv(ts, 1)) < 0), g
        assert np.all(np.asarray(g.psi_deriv(ts, 2)) >= 0), g


def test_log_forms_consistent():
    ts = np.geomspace(1e-3, 50.0, 25)
    for g in all_generators():
        assert_allclose(np.asarray(g.log_psi(ts)), np.log(np.asarray(g.psi(ts))), atol=1e-12)
        assert_allclose(
            np.asarray(g.log_neg_psi_deriv(ts)),
            np.log(-np.asarray(g.psi_deriv(ts, 1))),
            atol=1e-10,
        )
        # far beyond the underflow horizon of psi itself
        assert np.isfinite(float(g.log_psi(2000.0)))


def test_log1mexp_regimes():
    xs = np.array([-1e-12, -0.1, -1.0, -40.0, -800.0])
    ref = [np.log1p(-float(np.exp(x))) if x < -1 else float(np.log(-np.expm1(x))) for x in xs]
    assert_allclose(log1mexp(xs), ref, rtol=1e-13)
    assert log1mexp(-1e-300) < -600.0  # ~ log(1e-300)


class TestTilt:
    def test_clayton_tilt_is_rescaled_clayton(self):
        g = generator("clayton", 2.0)
        tg = g.tilt(6.0)
        ts = np.linspace(0.0, 40.0, 101)
        assert_allclose(np.asarray(tg.psi(ts)), np.asarray(g.psi(ts / 7.0)), atol=1e-13)

    def test_zero_tilt_is_identity(self):
        for g in all_generators():
            tg = g.tilt(0.0)
            ts = np.linspace(0.0, 30.0, 61)
            assert_allclose(np.asarray(tg.psi(ts)), np.asarray(g.psi(ts)), atol=1e-14)

    def test_amh_tilt_is_amh(self):
        g = generator("amh", 0.5)
        h = np.log(3.0)  # e^-h = 1/3
        tg = g.tilt(h)
        g2 = generator("amh", 0.5 / 3.0)
        ts = np.linspace(0.0, 40.0, 101)
        assert np.max(np.abs(np.asarray(tg.psi(ts)) - np.asarray(g2.psi(ts)))) <= 1e-10

    def test_frank_tilt_is_frank(self):
        theta = 4.0
        g = generator("frank", theta)
        for c in (0.2, 0.6, 0.9):
            tg = g.tilt(float(g.psi_inv(c)))
            g2 = generator("frank", theta * c)
            ts = np.linspace(0.0, 40.0, 101)
            assert np.max(np.abs(np.asarray(tg.psi(ts)) - np.asarray(g2.psi(ts)))) <= 1e-10

    def test_tilt_composition(self):
        for g in (generator("clayton", 2.0), generator("gumbel", 3.0), generator("frank", 10.0)):
            a = g.tilt(1.5).tilt(2.5)
            b = g.tilt(4.0)
            assert isinstance(a, TiltedGenerator) and a.base is g
            ts = np.linspace(0.0, 30.0, 61)
            assert np.max(np.abs(np.asarray(a.psi(ts)) - np.asarray(b.psi(ts)))) <= 1e-12

    def test_tilt_inverse_roundtrip(self):
        ts = np.linspace(0.0, 50.0, 101)
        for g in all_generators():
            for c in (0.5, 0.1):
                h = float(g.psi_inv(c))
                tg = g.tilt(h)
                back = np.asarray(tg.psi_inv(tg.psi(ts)))
                # for power-decay generators h grows like C(t)^-theta and the
                # tilted values crowd within (1+h)^-1 of 1, so the roundtrip
                # is resolution-limited to about (1+h) eps
                tol = max(1e-10, (1.0 + h) * 4e-14)
                assert np.max(np.abs(back - ts)) <= tol, g

    def test_negative_tilt_rejected(self):
        with pytest.raises(ValueError):
            generator("clayton", 2.0).tilt(-0.1)


class TestOuterPower:
    def test_pointwise_definition(self):
        g = generator("clayton", 1.0)
        op = g.outer_power(0.5)
        assert op.psi(4.0) == pytest.approx(1.0 / 3.0, rel=1e-14)
        assert_allclose(op.psi_inv(1.0 / 3.0), 4.0, rtol=1e-12)

    def test_alpha_one_identity(self):
        g = generator("joe", 2.0)
        op = g.outer_power(1.0)
        ts = np.linspace(0.0, 20.0, 41)
        assert_allclose(np.asarray(op.psi(ts)), np.asarray(g.psi(ts)), atol=1e-15)

    def test_gumbel_is_outer_power_of_independence(self):
        theta = 2.5
        op = generator("independence").outer_power(1.0 / theta)
        g = generator("gumbel", theta)
        ts = np.linspace(0.0, 30.0, 61)
        assert_allclose(np.asarray(op.psi(ts)), np.asarray(g.psi(ts)), atol=1e-14)

    def test_composition_multiplies_exponents(self):
        g = generator("clayton", 2.0)
        op = OuterPowerGenerator(OuterPowerGenerator(g, 0.5), 0.5)
        assert op.alpha == pytest.approx(0.25)
        assert op.base is g

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            generator("clayton", 2.0).outer_power(1.5)
        with pytest.raises(ValueError):
            generator("clayton", 2.0).outer_power(0.0)


def test_limiting_clayton_convergence():
    grid = np.linspace(0.0, 20.0, 201)
    theta = 2.0
    errs = []
    g = generator("clayton", theta)
    for h in (1e1, 1e2, 1e3, 1e4):
        tg = g.tilt(h)
        errs.append(np.max(np.abs(np.asarray(tg.psi(h * grid)) - (1.0 + grid) ** (-1.0 / theta))))
    assert np.all(np.diff(errs) < 0)
    assert errs[-1] < 1e-3

    alpha = 0.8
    gop = generator("clayton", theta, outer_alpha=alpha)
    errs = []
    for h in (1e1, 1e2, 1e3, 1e4):
        tg = gop.tilt(h)
        errs.append(np.max(np.abs(np.asarray(tg.psi(h * grid)) - (1.0 + grid) ** (-alpha / theta))))
    assert np.all(np.diff(errs) < 0)
    assert errs[-1] < 1e-3


class TestJSON:
    def test_roundtrip_plain(self):
        spec = {"family": "clayton", "theta": 2.0}
        g = generator_from_dict(spec)
        assert generator_to_dict(g) == spec

    def test_roundtrip_outer_power(self):
        spec = {"family": "gumbel", "theta": 2.0, "outer_alpha": 0.5}
        g = generator_from_dict(spec)
        assert isinstance(g, OuterPowerGenerator)
        assert generator_to_dict(g) == spec

    def test_independence_has_no_theta(self):
        assert generator_to_dict(generator("independence")) == {"family": "independence"}
        with pytest.raises(ValueError):
            generator("independence", 2.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            generator_from_dict({"family": "nope", "theta": 1.0})
        with pytest.raises(ValueError):
            generator_from_dict({"family": "clayton", "theta": 2.0, "bogus": 1})
        with pytest.raises(ValueError):
            generator_to_dict(generator("clayton", 2.0).tilt(1.0))
