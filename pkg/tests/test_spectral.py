import math

import numpy as np
import pytest

from spinbath.numerics import QuadratureSpec, integrate
from spinbath.spectral import (
    FlatWindowModel,
    LorentzianModel,
    NegativeFrequency,
    NullModel,
    OhmicModel,
    PhysicalConstants,
    ZeroFrequency,
    coupling_magnitude,
    effective_cutoff,
    format_model,
    parse_model,
    quadrature_hints,
    spectral_density,
    tail_cutoff,
)

SPEC = QuadratureSpec()


def random_model(rng):
    kind = rng.randint(3)
    if kind == 0:
        return OhmicModel(
            alpha=rng.uniform(0.0, 0.5),
            s=rng.choice([0.5, 1.0, 2.0]),
            omega_c=rng.uniform(0.5, 20.0),
        )
    if kind == 1:
        return LorentzianModel(
            alpha=rng.uniform(0.001, 0.3),
            omega_r=rng.uniform(0.3, 3.0),
            gamma0=rng.uniform(0.05, 1.0),
        )
    lo = rng.uniform(0.0, 2.0)
    return FlatWindowModel(j0=rng.uniform(0.0, 2.0), omega_lo=lo, omega_hi=lo + rng.uniform(0.1, 3.0))


class TestDensity:
    def test_null(self):
        assert spectral_density(NullModel(), 3.0) == 0.0

    def test_ohmic_at_zero(self):
        assert spectral_density(OhmicModel(alpha=0.1, s=1.0, omega_c=10.0), 0.0) == 0.0

    def test_ohmic_closed_form(self):
        m = OhmicModel(alpha=0.1, s=1.0, omega_c=10.0)
        assert spectral_density(m, 2.0) == pytest.approx(0.1 * 2.0 * math.exp(-0.2), rel=1e-14)

    def test_ohmic_peak_at_cutoff(self):
        # for s=1 the maximum of w e^{-w/wc} sits at wc
        m = OhmicModel(alpha=0.3, s=1.0, omega_c=4.0)
        w = np.linspace(0.0, 40.0, 20001)
        peak = w[np.argmax(spectral_density(m, w))]
        assert abs(peak - 4.0) < 0.01

    def test_lorentzian_peak_value(self):
        m = LorentzianModel(alpha=0.05, omega_r=1.0, gamma0=0.2)
        assert spectral_density(m, 1.0) == pytest.approx(0.05 / 0.2, rel=1e-14)

    def test_flat_window(self):
        m = FlatWindowModel(j0=0.5, omega_lo=0.5, omega_hi=1.5)
        assert spectral_density(m, 1.0) == 0.5
        assert spectral_density(m, 0.2) == 0.0
        assert spectral_density(m, 2.0) == 0.0

    def test_negative_frequency_rejected(self):
        with pytest.raises(NegativeFrequency):
            spectral_density(OhmicModel(alpha=0.1), -1.0)

    def test_nonnegative_everywhere(self):
        rng = np.random.RandomState(17)
        w = np.linspace(0.0, 50.0, 1001)
        for _ in range(20):
            m = random_model(rng)
            assert np.all(np.asarray(spectral_density(m, w)) >= 0.0)

    @pytest.mark.parametrize(
        "bad",
        [
            dict(alpha=-0.1),
            dict(alpha=0.1, s=0.0),
            dict(alpha=0.1, omega_c=-3.0),
        ],
    )
    def test_ohmic_validation(self, bad):
        with pytest.raises(ValueError):
            OhmicModel(**bad)

    def test_constants_validation(self):
        with pytest.raises(ValueError):
            PhysicalConstants(hbar=0.0)


class TestCouplingMagnitude:
    def test_null(self):
        assert coupling_magnitude(NullModel(), 2.0) == 0.0

    def test_flat_closed_form(self):
        m = FlatWindowModel(j0=0.5, omega_lo=0.5, omega_hi=1.5)
        assert coupling_magnitude(m, 1.0) == pytest.approx(
            math.sqrt(0.5 / (2.0 * math.pi)), rel=1e-14
        )

    def test_round_trip(self):
        rng = np.random.RandomState(23)
        for _ in range(10):
            m = random_model(rng)
            w = rng.uniform(1e-3, 0.9 * max(tail_cutoff(m, 1e-6), 1.0))
            j = float(spectral_density(m, w))
            f = float(coupling_magnitude(m, w))
            recon = (2.0 * math.pi / m.constants.c**3) * w * w * f * f
            assert recon == pytest.approx(j, rel=1e-13, abs=1e-300)

    def test_round_trip_nonunit_c(self):
        m = OhmicModel(alpha=0.1, s=1.0, omega_c=10.0, constants=PhysicalConstants(c=2.5))
        w = 1.7
        f = coupling_magnitude(m, w)
        assert (2.0 * math.pi / 2.5**3) * w * w * f * f == pytest.approx(
            float(spectral_density(m, w)), rel=1e-13
        )

    def test_zero_frequency_rejected(self):
        with pytest.raises(ZeroFrequency):
            coupling_magnitude(OhmicModel(alpha=0.1), 0.0)


class TestTailCutoff:
    def test_flat_compact_support(self):
        assert tail_cutoff(FlatWindowModel(j0=0.5, omega_lo=0.5, omega_hi=1.5), 1e-10) == 1.5

    def test_null(self):
        assert tail_cutoff(NullModel(), 1e-10) == 0.0

    def test_ohmic_bound_verified_by_quadrature(self):
        m = OhmicModel(alpha=0.1, s=1.0, omega_c=2.0)
        cut = tail_cutoff(m, 1e-12)
        # remaining weight integrated far past the cutoff stays below tolerance
        tail = integrate(
            lambda w: float(spectral_density(m, w)) * (1.0 + w), cut, cut + 80.0, SPEC
        )
        assert tail < 1e-12
        assert 40.0 < cut < 200.0

    def test_lorentzian_bound_verified_by_quadrature(self):
        m = LorentzianModel(alpha=0.05, omega_r=1.0, gamma0=0.2)
        tol = 1e-6
        cut = tail_cutoff(m, tol)
        tail = integrate(
            lambda w: float(spectral_density(m, w)) * (1.0 + w), cut, 30.0 * cut, SPEC
        )
        assert tail < tol

    def test_effective_cutoff_caps(self):
        m = LorentzianModel(alpha=0.05, omega_r=1.0, gamma0=0.2)
        spec = QuadratureSpec(upper_cutoff=100.0)
        assert effective_cutoff(m, spec) == 100.0

    def test_hints_include_breakpoints(self):
        m = FlatWindowModel(j0=0.5, omega_lo=0.5, omega_hi=1.5)
        assert 0.5 in quadrature_hints(m) and 1.5 in quadrature_hints(m)


class TestGrammar:
    def test_ohmic(self):
        m = parse_model("ohmic alpha=0.1 s=1 omega_c=10")
        assert m == OhmicModel(alpha=0.1, s=1.0, omega_c=10.0)

    def test_lorentzian(self):
        m = parse_model("lorentzian alpha=0.05 omega_r=1 gamma0=0.2")
        assert isinstance(m, LorentzianModel) and m.gamma0 == 0.2

    def test_flat(self):
        m = parse_model("flat j0=0.5 lo=0.5 hi=1.5")
        assert isinstance(m, FlatWindowModel) and m.omega_hi == 1.5

    def test_null(self):
        assert isinstance(parse_model("null"), NullModel)

    def test_round_trip_format(self):
        for text in (
            "ohmic alpha=0.1 s=1 omega_c=10",
            "lorentzian alpha=0.05 omega_r=1 gamma0=0.2",
            "flat j0=0.5 lo=0.5 hi=1.5",
            "null",
        ):
            m = parse_model(text)
            assert parse_model(format_model(m)) == m

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("", "missing"),
            ("quadratic a=1", "unknown kind"),
            ("ohmic alpha=0.1 s=1", "missing parameter"),
            ("ohmic alpha=0.1 s=1 omega_c=10 foo=2", "unknown parameter"),
            ("ohmic alpha=0.1 s=1 omega_c=ten", "not a number"),
            ("ohmic alpha=0.1 s=1 omega_c=-3", "omega_c: must be > 0"),
            ("ohmic alpha=0.1 alpha=0.2 s=1 omega_c=1", "duplicate"),
        ],
    )
    def test_errors(self, text, fragment):
        with pytest.raises(ValueError, match=fragment):
            parse_model(text)
