"""First-order transition probabilities with the environment in a thermal
state.

Starting from a spin eigenstate, first-order perturbation theory gives the
occupation transferred to the other eigenstate after time t:

    P_down(t) = int_0^inf J(w) K_t(w - w0) (nbar(w) + 1) dw   (emission),
    P_up(t)   = int_0^inf J(w) K_t(w - w0)  nbar(w)      dw   (absorption),

with the spectral window K_t(d) = sin^2(d t / 2) / (d / 2)^2 and the Bose
occupation nbar(w) = 1 / (e^{hbar w / k_B T} - 1). For long times K_t
concentrates at the transition frequency, K_t -> 2 pi t delta(w - w0), and
the probabilities become linear in t with golden-rule rates

    rate_down = 2 beta (nbar(w0) + 1),    rate_up = 2 beta nbar(w0),

where beta = pi J(w0). Their ratio is the Boltzmann factor
e^{hbar w0 / k_B T} (detailed balance), and absorption vanishes at T = 0.

First-order results are trustworthy only while P << 1; a
PerturbationBreakdown warning is emitted above 0.1. The linear-in-t
golden-rule quantities are exposed as rates rather than probabilities,
since a probability proportional to t exceeds 1 beyond the perturbative
window.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .numerics import QuadratureSpec, fourier_integral, integrate
from .spectral import (
    PhysicalConstants,
    SpectralModel,
    ZeroFrequency,
    effective_cutoff,
    quadrature_hints,
    spectral_density,
)


class PerturbationBreakdown(UserWarning):
    """First-order probability left its domain of validity (P > 0.1)."""


class Direction(enum.Enum):
    """Sense of the transition between the spin eigenstates."""

    DOWN = "down"  # +hbar w0/2 -> -hbar w0/2, emission
    UP = "up"      # -hbar w0/2 -> +hbar w0/2, absorption


class Regime(enum.Enum):
    FINITE_TIME = "finite_time"
    GOLDEN_RULE = "golden_rule"


@dataclass(frozen=True)
class ThermalState:
    """Environment temperature plus the unit system."""

    temperature: float
    constants: PhysicalConstants = field(default=PhysicalConstants())

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature: must be >= 0")


@dataclass(frozen=True)
class TransitionResult:
    probability: float
    direction: Direction
    t: float
    regime: Regime

    def __post_init__(self):
        if self.probability < 0:
            raise ValueError("probability: must be >= 0")


def bose_occupation(thermal: ThermalState, omega: float) -> float:
    """Mean thermal occupation nbar(omega) = 1/(e^{hbar w / k_B T} - 1).

    Exactly zero at T = 0. Uses expm1 so the classical regime
    hbar w << k_B T stays accurate, and switches to e^{-x} for large x to
    avoid overflow.
    """
    if omega <= 0:
        raise ZeroFrequency("bose occupation requires omega > 0")
    if thermal.temperature == 0.0:
        return 0.0
    x = (
        thermal.constants.hbar
        * omega
        / (thermal.constants.k_B * thermal.temperature)
    )
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def golden_rule_rate(
    model: SpectralModel,
    omega0: float,
    thermal: ThermalState,
    direction: Direction,
) -> float:
    """Long-time transition probability per unit time.

    2 beta (nbar + 1) for emission, 2 beta nbar for absorption, with
    beta = pi J(omega0).
    """
    if not (omega0 > 0):
        raise ValueError("omega0: must be > 0")
    two_beta = 2.0 * math.pi * float(spectral_density(model, omega0))
    nbar = bose_occupation(thermal, omega0)
    if direction is Direction.DOWN:
        return two_beta * (nbar + 1.0)
    return two_beta * nbar


def _window_kernel(d: float, t: float) -> float:
    # sin^2(d t / 2)/(d/2)^2 = 2 (1 - cos(d t))/d^2, series-guarded near
    # the removable singularity at d = 0
    x = d * t
    if abs(x) < 1e-5:
        return t * t * (1.0 - x * x / 12.0)
    return 2.0 * (1.0 - math.cos(x)) / (d * d)


def finite_time_probability(
    model: SpectralModel,
    omega0: float,
    thermal: ThermalState,
    direction: Direction,
    t: float,
    quad: QuadratureSpec,
) -> TransitionResult:
    """First-order transition probability after a finite time t.

    For long times the spectral window oscillates rapidly away from the
    resonance, so the domain is split: the near-resonant band is
    integrated directly, while in the far region the constant and
    cos((w - w0) t) parts of the window are integrated separately, the
    latter with an oscillation-aware rule. P(0) = 0 and
    P(t)/t -> golden_rule_rate as t grows.
    """
    if t < 0:
        raise ValueError("t: must be >= 0")
    if not (omega0 > 0):
        raise ValueError("omega0: must be > 0")

    def finish(p: float) -> TransitionResult:
        p = max(p, 0.0)
        if p > 0.1:
            warnings.warn(
                f"first-order probability {p:.3g} exceeds 0.1; result is "
                "outside the perturbative regime",
                PerturbationBreakdown,
                stacklevel=2,
            )
        return TransitionResult(
            probability=p, direction=direction, t=t, regime=Regime.FINITE_TIME
        )

    if t == 0.0:
        return finish(0.0)
    if direction is Direction.UP and thermal.temperature == 0.0:
        return finish(0.0)

    cutoff = effective_cutoff(model, quad)
    if cutoff <= 0.0:
        return finish(0.0)

    if direction is Direction.DOWN:
        occ = lambda w: bose_occupation(thermal, w) + 1.0 if thermal.temperature > 0 else 1.0
    else:
        occ = lambda w: bose_occupation(thermal, w)

    def g(w: float) -> float:
        return float(spectral_density(model, w)) * occ(w)

    bp = quadrature_hints(model)

    # few oscillations across the whole band: a single adaptive pass
    if t * cutoff <= 50.0:
        val = integrate(
            lambda w: g(w) * _window_kernel(w - omega0, t),
            0.0,
            cutoff,
            quad,
            breakpoints=bp + (omega0,),
        )
        return finish(val)

    half_width = 20.0 * math.pi / t
    lo = min(max(omega0 - half_width, 0.0), cutoff)
    hi = min(max(omega0 + half_width, 0.0), cutoff)
    total = 0.0
    if hi > lo:
        total += integrate(
            lambda w: g(w) * _window_kernel(w - omega0, t),
            lo,
            hi,
            quad,
            breakpoints=bp + (omega0,),
        )
    cos_w0t = math.cos(omega0 * t)
    sin_w0t = math.sin(omega0 * t)
    for a, b in ((0.0, lo), (hi, cutoff)):
        if b <= a:
            continue
        far = lambda w: 2.0 * g(w) / ((w - omega0) * (w - omega0))
        total += integrate(far, a, b, quad, breakpoints=bp)
        # cos((w - w0) t) = cos(wt) cos(w0 t) + sin(wt) sin(w0 t)
        total -= cos_w0t * fourier_integral(far, a, b, t, "cos", quad, breakpoints=bp)
        total -= sin_w0t * fourier_integral(far, a, b, t, "sin", quad, breakpoints=bp)
    return finish(total)
