"""Decay amplitude of an initially excited spin.

Within the rotating-wave approximation and the single-excitation sector,
the excited-state amplitude obeys the memory equation

    dc/dt = integral_0^t gamma(t - t') c(t') dt',   c(0) = 1,

with the complex kernel

    gamma(tau) = - integral_0^inf J(w) e^{i (w0 - w) tau} dw,

where w0 is the spin precession frequency. ``solve_amplitude`` integrates
this equation exactly (numerically); ``markov_rates`` gives the
weak-coupling constants of the exponential solution e^{-(beta + i Delta) t},

    beta  = pi J(w0)                      (spontaneous decay rate),
    Delta = P int_0^inf J(w)/(w0 - w) dw  (frequency shift),

and ``solve_discrete_oracle`` provides an independent route: the
environment continuum replaced by N discrete modes propagated as a closed
Schroedinger system, which conserves |c|^2 + sum |d_k|^2 exactly and
converges to the continuum dynamics as N grows.

Comparison against the Markov exponential is meaningful for t up to a few
multiples of 1/beta; the exact solution is reported for all requested t.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .numerics import (
    AmplitudeTrajectory,
    NonFiniteState,
    QuadratureSpec,
    fourier_integral,
    integrate,
    integrate_pv,
    solve_volterra,
)
from .spectral import (
    SpectralModel,
    effective_cutoff,
    quadrature_hints,
    spectral_density,
)

__all__ = [
    "AmplitudeTrajectory",
    "MarkovRates",
    "MemoryKernel",
    "kernel_eval",
    "markov_amplitude",
    "markov_rates",
    "solve_amplitude",
    "solve_discrete_oracle",
    "tabulate_kernel",
]


@dataclass(frozen=True)
class MarkovRates:
    """Weak-coupling decay rate and frequency shift."""

    beta: float
    delta: float

    def __post_init__(self):
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError("beta: must be finite and >= 0")
        if not math.isfinite(self.delta):
            raise ValueError("delta: must be finite")


@dataclass
class MemoryKernel:
    """gamma(tau) tabulated on a uniform grid for one (model, omega0)."""

    model: SpectralModel
    omega0: float
    tau: np.ndarray
    samples: np.ndarray


def kernel_eval(
    model: SpectralModel, omega0: float, tau: float, quad: QuadratureSpec
) -> complex:
    """Memory kernel gamma(tau) by quadrature of its real and imaginary parts.

    gamma(tau) = -e^{i w0 tau} * [C(tau) - i S(tau)] with C and S the
    cosine and sine transforms of J over [0, cutoff].
    """
    if tau < 0:
        raise ValueError("tau: must be >= 0")
    cutoff = effective_cutoff(model, quad)
    if cutoff <= 0.0:
        return 0.0 + 0.0j
    J = lambda w: spectral_density(model, w)
    bp = quadrature_hints(model)
    if tau == 0.0:
        return complex(-integrate(J, 0.0, cutoff, quad, breakpoints=bp))
    cpart = fourier_integral(J, 0.0, cutoff, tau, "cos", quad, breakpoints=bp)
    spart = fourier_integral(J, 0.0, cutoff, tau, "sin", quad, breakpoints=bp)
    phase = complex(math.cos(omega0 * tau), math.sin(omega0 * tau))
    return -phase * complex(cpart, -spart)


# a handful of (model, omega0, dt, n, cutoff-relevant spec) tables; each
# solve re-uses its own, sweeps re-use across calls
_KERNEL_CACHE: OrderedDict[tuple, np.ndarray] = OrderedDict()
_KERNEL_CACHE_MAX = 8


def tabulate_kernel(
    model: SpectralModel,
    omega0: float,
    n_steps: int,
    dt: float,
    quad: QuadratureSpec,
) -> MemoryKernel:
    """gamma on the uniform grid {0, dt, ..., n_steps*dt}.

    Each node is evaluated by its own quadrature (no interpolation in
    tau); results are cached per (model, omega0, dt, n, spec).
    """
    key = (model, omega0, n_steps, dt, quad)
    if key in _KERNEL_CACHE:
        _KERNEL_CACHE.move_to_end(key)
        samples = _KERNEL_CACHE[key]
    else:
        samples = np.array(
            [kernel_eval(model, omega0, j * dt, quad) for j in range(n_steps + 1)]
        )
        _KERNEL_CACHE[key] = samples
        if len(_KERNEL_CACHE) > _KERNEL_CACHE_MAX:
            _KERNEL_CACHE.popitem(last=False)
    return MemoryKernel(
        model=model, omega0=omega0, tau=np.arange(n_steps + 1) * dt, samples=samples
    )


def markov_rates(
    model: SpectralModel, omega0: float, quad: QuadratureSpec
) -> MarkovRates:
    """Decay rate beta = pi J(w0) and shift Delta = P int J/(w0 - w) dw."""
    if not (omega0 > 0):
        raise ValueError("omega0: must be > 0")
    beta = math.pi * float(spectral_density(model, omega0))
    cutoff = effective_cutoff(model, quad)
    if cutoff <= 0.0:
        return MarkovRates(beta=0.0, delta=0.0)
    J = lambda w: float(spectral_density(model, w))
    bp = quadrature_hints(model)
    if 0.0 < omega0 < cutoff:
        delta = integrate_pv(J, omega0, 0.0, cutoff, quad, breakpoints=bp)
    else:
        # pole outside the truncated support: plain quadrature
        delta = integrate(
            lambda w: J(w) / (omega0 - w), 0.0, cutoff, quad, breakpoints=bp
        )
    return MarkovRates(beta=beta, delta=delta)


def markov_amplitude(rates: MarkovRates, t: float) -> complex:
    """Weak-coupling amplitude e^{-(beta + i Delta) t}."""
    if t < 0:
        raise ValueError("t: must be >= 0")
    return complex(np.exp(-(rates.beta + 1j * rates.delta) * t))


def solve_amplitude(
    model: SpectralModel,
    omega0: float,
    t_max: float,
    dt: float,
    quad: QuadratureSpec,
) -> AmplitudeTrajectory:
    """Exact amplitude c(t) from the memory equation.

    The kernel is tabulated on the dt grid and the Volterra equation is
    solved by product integration. dt should resolve both 1/omega0 and
    the kernel's own decay time (for an exponential-cutoff density,
    1/omega_c); dt <= 0.1 * min(1/omega0, 1/omega_c) is a safe choice.
    """
    n = int(round(t_max / dt))
    if n < 1:
        raise ValueError("t_max: must be >= dt")
    dt = t_max / n  # match the tiling used by the Volterra march
    kern = tabulate_kernel(model, omega0, n, dt, quad)
    samples = kern.samples

    def kernel(tau: float) -> complex:
        return samples[int(round(tau / dt))]

    return solve_volterra(kernel, t_max, dt)


def solve_discrete_oracle(
    model: SpectralModel,
    omega0: float,
    n_modes: int,
    t_max: float,
    dt: float,
    quad: QuadratureSpec | None = None,
    cutoff: float | None = None,
) -> AmplitudeTrajectory:
    """Brute-force cross-check: N discrete modes instead of the continuum.

    The band [0, cutoff] is sampled at midpoint nodes w_k with weights
    w = cutoff/N (midpoints avoid both w = 0 and exact resonance), each
    coupled with strength h_k = sqrt(w * J(w_k)):

        dc/dt  = - sum_k h_k e^{i (w0 - w_k) t} d_k,
        dd_k/dt =        h_k e^{-i (w0 - w_k) t} c,

    from c(0) = 1, d_k(0) = 0, integrated with the classical fixed-step
    4th-order Runge-Kutta scheme. The evolution is norm-preserving, and
    1 - |c|^2 - sum |d_k|^2 is reported per sample as ``norm_defect``.
    Only c and the defect are stored; the mode amplitudes stay internal.

    dt must resolve the largest detuning, dt <~ 0.1 / max|w0 - w_k|.
    """
    if n_modes < 1:
        raise ValueError("n_modes: must be >= 1")
    if dt <= 0:
        raise ValueError("dt: must be > 0")
    quad = quad or QuadratureSpec()
    if cutoff is None:
        cutoff = effective_cutoff(model, quad)
    n_steps = int(round(t_max / dt))
    if n_steps < 1:
        raise ValueError("t_max: must be >= dt")
    dt = t_max / n_steps

    if cutoff <= 0.0:
        t = np.arange(n_steps + 1) * dt
        return AmplitudeTrajectory(
            t=t, c=np.ones(n_steps + 1, complex), norm_defect=np.zeros(n_steps + 1)
        )

    weight = cutoff / n_modes
    w_nodes = (np.arange(n_modes) + 0.5) * weight
    h = np.sqrt(weight * np.asarray(spectral_density(model, w_nodes), dtype=float))
    theta = omega0 - w_nodes

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        phase = np.exp(1j * theta * t)
        out = np.empty_like(y)
        out[0] = -np.dot(h * phase, y[1:])
        out[1:] = (h * y[0]) * np.conj(phase)
        return out

    y = np.zeros(n_modes + 1, dtype=complex)
    y[0] = 1.0
    c = np.empty(n_steps + 1, dtype=complex)
    defect = np.empty(n_steps + 1)
    c[0] = 1.0
    defect[0] = 0.0
    half = 0.5 * dt
    for i in range(n_steps):
        t = i * dt
        k1 = rhs(t, y)
        k2 = rhs(t + half, y + half * k1)
        k3 = rhs(t + half, y + half * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y.view(float))):
            raise NonFiniteState(f"oracle state not finite at t={t + dt!r}")
        c[i + 1] = y[0]
        defect[i + 1] = 1.0 - np.vdot(y, y).real
    t_grid = np.arange(n_steps + 1) * dt
    return AmplitudeTrajectory(t=t_grid, c=c, norm_defect=defect)
