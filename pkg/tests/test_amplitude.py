import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from spinbath.amplitude import (
    MarkovRates,
    kernel_eval,
    markov_amplitude,
    markov_rates,
    solve_amplitude,
    solve_discrete_oracle,
    tabulate_kernel,
)
from spinbath.numerics import QuadratureSpec, integrate
from spinbath.spectral import (
    FlatWindowModel,
    NullModel,
    OhmicModel,
    LorentzianModel,
    effective_cutoff,
    quadrature_hints,
    spectral_density,
)

SPEC = QuadratureSpec()
Q80 = QuadratureSpec(upper_cutoff=80.0)
OHMIC_001 = OhmicModel(alpha=0.001, s=1.0, omega_c=10.0)
FLAT = FlatWindowModel(j0=0.5, omega_lo=0.5, omega_hi=1.5)


def ohmic_kernel_exact(alpha, s, wc, w0, tau):
    # semi-infinite transform of a power law with exponential cutoff
    a = 1.0 / wc
    return -np.exp(1j * w0 * tau) * alpha * wc ** (1.0 - s) * gamma_fn(s + 1.0) / (
        a + 1j * tau
    ) ** (s + 1.0)


class TestKernel:
    def test_null(self):
        assert kernel_eval(NullModel(), 1.0, 0.5, SPEC) == 0.0

    def test_tau_zero_ohmic(self):
        m = OhmicModel(alpha=0.1, s=1.0, omega_c=10.0)
        got = kernel_eval(m, 1.0, 0.0, SPEC)
        assert got.imag == 0.0
        assert got.real == pytest.approx(-0.1 * 100.0, rel=1e-8)

    def test_tau_zero_flat(self):
        assert kernel_eval(FLAT, 1.0, 0.0, SPEC) == pytest.approx(-0.5, rel=1e-12)

    @pytest.mark.parametrize("s,tau", [(0.5, 2.0), (1.0, 0.3), (1.0, 7.0), (2.0, 0.7)])
    def test_ohmic_closed_form(self, s, tau):
        m = OhmicModel(alpha=0.1, s=s, omega_c=10.0)
        got = kernel_eval(m, 1.0, tau, SPEC)
        assert abs(got - ohmic_kernel_exact(0.1, s, 10.0, 1.0, tau)) < 1e-9

    def test_flat_closed_form(self):
        tau = 1.7
        expected = (
            -np.exp(1j * tau)
            * 0.5
            * (np.exp(-1j * 0.5 * tau) - np.exp(-1j * 1.5 * tau))
            / (1j * tau)
        )
        assert abs(kernel_eval(FLAT, 1.0, tau, SPEC) - expected) < 1e-12

    def test_bound_by_value_at_zero(self):
        rng = np.random.RandomState(2)
        for model in (OhmicModel(alpha=0.2, s=1.0, omega_c=5.0), FLAT,
                      LorentzianModel(alpha=0.05, omega_r=1.0, gamma0=0.2)):
            g0 = kernel_eval(model, 1.0, 0.0, SPEC)
            assert g0.real <= 0.0
            for _ in range(4):
                tau = rng.uniform(0.0, 10.0)
                assert abs(kernel_eval(model, 1.0, tau, SPEC)) <= abs(g0) * (1 + 1e-9)

    def test_tabulation_matches_scalar(self):
        kern = tabulate_kernel(OHMIC_001, 1.0, 40, 0.25, Q80)
        for j in (0, 1, 17, 40):
            direct = kernel_eval(OHMIC_001, 1.0, j * 0.25, Q80)
            assert abs(kern.samples[j] - direct) == 0.0

    def test_tabulation_cache_hit(self):
        a = tabulate_kernel(OHMIC_001, 1.0, 10, 0.1, Q80)
        b = tabulate_kernel(OHMIC_001, 1.0, 10, 0.1, Q80)
        assert a.samples is b.samples

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError):
            kernel_eval(FLAT, 1.0, -0.1, SPEC)


class TestMarkovRates:
    def test_null(self):
        r = markov_rates(NullModel(), 1.0, SPEC)
        assert (r.beta, r.delta) == (0.0, 0.0)

    def test_ohmic_beta_closed_form(self):
        r = markov_rates(OhmicModel(alpha=0.01, s=1.0, omega_c=10.0), 1.0, SPEC)
        assert r.beta == pytest.approx(math.pi * 0.01 * math.exp(-0.1), abs=1e-15)

    def test_ohmic_delta_frozen(self):
        # frozen from a 40-digit principal-value evaluation
        r = markov_rates(OhmicModel(alpha=0.01, s=1.0, omega_c=10.0), 1.0, SPEC)
        assert r.delta == pytest.approx(-0.11468381756547630, abs=1e-9)

    def test_flat_symmetric_window(self):
        r = markov_rates(FLAT, 1.0, SPEC)
        assert abs(r.delta) < 1e-10
        assert r.beta == pytest.approx(math.pi * 0.5, abs=1e-14)

    def test_pole_outside_support(self):
        # window entirely below the transition: plain integral, positive shift
        m = FlatWindowModel(j0=0.5, omega_lo=0.1, omega_hi=0.5)
        r = markov_rates(m, 1.0, SPEC)
        assert r.beta == 0.0
        expected = 0.5 * math.log((1.0 - 0.1) / (1.0 - 0.5))
        assert r.delta == pytest.approx(expected, rel=1e-10)

    def test_kernel_time_integral_matches_rates(self):
        # regularized long-time sum of the kernel approaches -(beta + i delta);
        # the tau integral of gamma(tau) e^{-eps tau} done exactly in omega
        m = OhmicModel(alpha=0.01, s=1.0, omega_c=10.0)
        rates = markov_rates(m, 1.0, SPEC)
        cutoff = effective_cutoff(m, SPEC)

        def regularized(eps):
            hints = quadrature_hints(m) + tuple(1.0 + k * eps for k in (-30, -3, 0, 3, 30))
            re = integrate(
                lambda w: -float(spectral_density(m, w)) * eps / (eps**2 + (1.0 - w) ** 2),
                0.0, cutoff, SPEC, breakpoints=hints,
            )
            im = integrate(
                lambda w: -float(spectral_density(m, w)) * (1.0 - w) / (eps**2 + (1.0 - w) ** 2),
                0.0, cutoff, SPEC, breakpoints=hints,
            )
            return complex(re, im)

        # leading correction is O(eps) from the half-line boundary at w=0
        extrap = 2.0 * regularized(2.5e-3) - regularized(5e-3)
        target = -(rates.beta + 1j * rates.delta)
        assert abs(extrap - target) < 1e-6

    def test_omega0_must_be_positive(self):
        with pytest.raises(ValueError):
            markov_rates(FLAT, 0.0, SPEC)

    def test_rates_validation(self):
        with pytest.raises(ValueError):
            MarkovRates(beta=-1.0, delta=0.0)
        with pytest.raises(ValueError):
            MarkovRates(beta=0.0, delta=math.nan)


class TestMarkovAmplitude:
    def test_t_zero(self):
        assert markov_amplitude(MarkovRates(0.5, 0.3), 0.0) == 1.0

    def test_free_spin(self):
        assert markov_amplitude(MarkovRates(0.0, 0.0), 7.0) == 1.0

    def test_complex_value_frozen(self):
        # e^{-1} (cos 0.6 - i sin 0.6), frozen from a 40-digit evaluation
        got = markov_amplitude(MarkovRates(0.5, 0.3), 2.0)
        assert got.real == pytest.approx(0.30362400479186117, abs=1e-15)
        assert got.imag == pytest.approx(-0.20772035757422660, abs=1e-15)

    def test_modulus_and_phase(self):
        got = markov_amplitude(MarkovRates(0.2, 1.1), 3.0)
        assert abs(got) == pytest.approx(math.exp(-0.6), rel=1e-12)
        assert math.isclose(math.atan2(got.imag, got.real), -3.3 + 2 * math.pi, rel_tol=1e-9)


class TestSolveAmplitude:
    def test_null_stays_one(self):
        traj = solve_amplitude(NullModel(), 1.0, 5.0, 0.01, SPEC)
        assert np.all(traj.c == 1.0)

    def test_weak_coupling_markov_envelope(self):
        m = OhmicModel(alpha=0.004, s=1.0, omega_c=10.0)
        beta = math.pi * float(spectral_density(m, 1.0))
        traj = solve_amplitude(m, 1.0, 3.0 / beta, 0.02, Q80)
        err = np.max(np.abs(np.abs(traj.c) - np.exp(-beta * traj.t)))
        assert err <= 0.02

    def test_markov_reduction_scales_with_coupling(self):
        errs = {}
        for alpha in (4e-3, 1e-3):
            m = OhmicModel(alpha=alpha, s=1.0, omega_c=10.0)
            beta = math.pi * float(spectral_density(m, 1.0))
            traj = solve_amplitude(m, 1.0, 1.0 / beta, 0.02, Q80)
            errs[alpha] = np.max(np.abs(np.abs(traj.c) - np.exp(-beta * traj.t)))
        ratio = errs[4e-3] / errs[1e-3]
        assert 2.0 < ratio < 6.0

    def test_matches_oracle_short_horizon(self):
        traj_v = solve_amplitude(OHMIC_001, 1.0, 10.0, 0.005, Q80)
        traj_o = solve_discrete_oracle(OHMIC_001, 1.0, 800, 10.0, 0.001, quad=Q80, cutoff=80.0)
        diff = np.max(np.abs(np.abs(traj_v.c) - np.abs(traj_o.c[::5])))
        assert diff < 2e-5


class TestDiscreteOracle:
    def test_null(self):
        traj = solve_discrete_oracle(NullModel(), 1.0, 5, 1.0, 0.01)
        assert np.all(traj.c == 1.0)
        assert np.all(traj.norm_defect == 0.0)

    def test_resonant_single_mode_rabi(self):
        # one midpoint node at w0: two-level reduction, c = cos(sqrt(g) t)
        m = FlatWindowModel(j0=0.25, omega_lo=0.0, omega_hi=2.0)
        traj = solve_discrete_oracle(m, 1.0, 1, 1.0, 1e-4)
        g = 2.0 * 0.25
        assert np.max(np.abs(traj.c - np.cos(np.sqrt(g) * traj.t))) < 1e-12

    def test_unitarity(self):
        m = OhmicModel(alpha=0.01, s=1.0, omega_c=10.0)
        traj = solve_discrete_oracle(m, 1.0, 200, 5.0, 0.002, cutoff=40.0)
        assert np.max(np.abs(traj.norm_defect)) < 1e-8

    def test_validation(self):
        with pytest.raises(ValueError):
            solve_discrete_oracle(FLAT, 1.0, 0, 1.0, 0.01)
        with pytest.raises(ValueError):
            solve_discrete_oracle(FLAT, 1.0, 5, 1.0, -0.01)
