"""Numerical toolkit for a spin-1/2 in a uniform magnetic field coupled to
an absorbing oscillator continuum.

The pieces fit together as follows: ``spectral`` parameterizes the
environment through its spectral density J(w); ``response`` computes the
induced susceptibility in time and frequency and checks the
Kramers-Kronig relations; ``amplitude`` solves the exact decay of an
initially excited spin and its weak-coupling (exponential) limit;
``thermal`` gives first-order transition probabilities at finite
temperature; ``bloch`` integrates the mean-field spin precession with
memory damping; ``numerics`` holds the shared quadrature and integrator
engines; ``cli`` exposes everything as the ``spinbath`` command.
"""

from .numerics import (
    AmplitudeTrajectory,
    GridSpec,
    NonConvergence,
    NonFiniteIntegrand,
    NonFiniteState,
    NumericalError,
    OdeTrajectory,
    PoleOutsideInterval,
    QuadratureSpec,
    StepTooLarge,
    fourier_integral,
    integrate,
    integrate_pv,
    solve_volterra,
    step_ode,
)
from .spectral import (
    FlatWindowModel,
    LorentzianModel,
    NegativeFrequency,
    NullModel,
    OhmicModel,
    PhysicalConstants,
    SpectralModel,
    ZeroFrequency,
    coupling_magnitude,
    effective_cutoff,
    format_model,
    parse_model,
    spectral_density,
    tail_cutoff,
)
from .response import (
    SusceptibilitySample,
    SusceptibilitySpectrum,
    chi_freq,
    chi_spectrum,
    chi_time,
    chi_time_series,
    kk_residual,
)
from .amplitude import (
    MarkovRates,
    MemoryKernel,
    kernel_eval,
    markov_amplitude,
    markov_rates,
    solve_amplitude,
    solve_discrete_oracle,
    tabulate_kernel,
)
from .thermal import (
    Direction,
    PerturbationBreakdown,
    Regime,
    ThermalState,
    TransitionResult,
    bose_occupation,
    finite_time_probability,
    golden_rule_rate,
)
from .bloch import BlochState, BlochTrajectory, simulate_bloch

__version__ = "0.1.0"
