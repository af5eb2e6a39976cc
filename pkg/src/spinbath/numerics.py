"""Shared numerical engines used by every physics module.

Provides adaptive quadrature on finite intervals (including oscillatory
sine/cosine weights), Cauchy principal-value integrals by singularity
subtraction, a product-trapezoidal solver for linear Volterra
integro-differential equations with convolution kernels, and a fixed-step
classical Runge-Kutta integrator.

All routines are pure functions of their inputs; there is no shared
mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad


class NumericalError(Exception):
    """Base class for runtime numerical failures."""


class NonConvergence(NumericalError):
    """Quadrature error estimate stayed above the requested tolerance."""


class NonFiniteIntegrand(NumericalError):
    """The integrand produced a NaN or infinity."""


class PoleOutsideInterval(NumericalError):
    """Principal-value pole does not lie strictly inside the interval."""


class StepTooLarge(NumericalError):
    """Volterra solution grew past its physical bound, signaling instability."""


class NonFiniteState(NumericalError):
    """An ODE state stopped being finite."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits shared by all quadrature-based operations.

    ``upper_cutoff`` is the finite surrogate for infinite upper limits:
    integrands over [0, inf) are truncated at the smaller of this value
    and the model-supplied tail bound.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000
    upper_cutoff: float = 1e4

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise ValueError("abs_tol: must be > 0")
        if not (self.rel_tol > 0):
            raise ValueError("rel_tol: must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions: must be >= 1")
        if not (self.upper_cutoff > 0):
            raise ValueError("upper_cutoff: must be > 0")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [start, stop] with n_points samples."""

    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        if not (self.stop > self.start):
            raise ValueError("grid: stop must be > start")
        if self.n_points < 2:
            raise ValueError("grid: n_points must be >= 2")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)


@dataclass
class AmplitudeTrajectory:
    """Complex amplitude c on a uniform time grid.

    ``norm_defect`` is populated only by the discretized-continuum solver,
    where it records 1 - |c|^2 - sum_k |d_k|^2 per sample.
    """

    t: np.ndarray
    c: np.ndarray
    norm_defect: np.ndarray | None = None


@dataclass
class OdeTrajectory:
    """States of a fixed-step ODE solve; states[i] corresponds to t[i]."""

    t: np.ndarray
    states: np.ndarray


def _finite_guard(f: Callable[[float], float]) -> Callable[[float], float]:
    def g(x: float) -> float:
        v = float(f(x))
        if not math.isfinite(v):
            raise NonFiniteIntegrand(f"integrand not finite at x={x!r}")
        return v

    return g


def _check_quad_output(out, spec: QuadratureSpec) -> float:
    value, abserr = out[0], out[1]
    if not math.isfinite(value):
        raise NonFiniteIntegrand("quadrature produced a non-finite value")
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    if len(out) > 3 and abserr > tol:
        raise NonConvergence(out[3].replace("\n", " ").strip())
    if abserr > tol:
        raise NonConvergence(
            f"error estimate {abserr:.3e} above tolerance {tol:.3e}"
        )
    return value


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec,
    breakpoints: Sequence[float] = (),
) -> float:
    """Adaptive quadrature of ``f`` over [a, b].

    Parameters
    ----------
    f : callable
        Real-valued integrand; must be finite on [a, b].
    a, b : float
        Integration limits with a <= b.
    spec : QuadratureSpec
        Tolerances and subdivision budget.
    breakpoints : sequence of float, optional
        Interior points where the integrand is non-smooth (kinks, jumps);
        points outside (a, b) are ignored.

    Returns
    -------
    float
        The integral, with estimated error below
        max(abs_tol, rel_tol * |result|).
    """
    if not (a <= b):
        raise ValueError("integrate: requires a <= b")
    if a == b:
        return 0.0
    pts = sorted(p for p in breakpoints if a < p < b) or None
    out = quad(
        _finite_guard(f),
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=max(spec.max_subdivisions, 10 + (len(pts) if pts else 0)),
        points=pts,
        full_output=1,
    )
    return _check_quad_output(out, spec)


def fourier_integral(
    f: Callable[[float], float],
    a: float,
    b: float,
    freq: float,
    kind: str,
    spec: QuadratureSpec,
    breakpoints: Sequence[float] = (),
) -> float:
    """Oscillatory-weighted quadrature: integral of f(x)*cos(freq*x) or
    f(x)*sin(freq*x) over [a, b].

    The oscillation is handled analytically by the weighted rule, so the
    cost does not grow with ``freq``; only ``f`` itself needs to be
    resolved. Discontinuities of ``f`` must be listed in ``breakpoints``
    because weighted rules cannot take interior points directly.
    """
    if kind not in ("cos", "sin"):
        raise ValueError("fourier_integral: kind must be 'cos' or 'sin'")
    if not (a <= b):
        raise ValueError("fourier_integral: requires a <= b")
    if a == b:
        return 0.0
    edges = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    g = _finite_guard(f)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        out = quad(
            g,
            lo,
            hi,
            weight=kind,
            wvar=freq,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            full_output=1,
        )
        total += _check_quad_output(out, spec)
    return total


def integrate_pv(
    g: Callable[[float], float],
    pole: float,
    a: float,
    b: float,
    spec: QuadratureSpec,
    breakpoints: Sequence[float] = (),
) -> float:
    """Cauchy principal value of integral g(w) / (pole - w) over [a, b].

    Uses singularity subtraction,

        P int g/(pole-w) dw
            = int [g(w) - g(pole)]/(pole - w) dw
              + g(pole) * log((pole - a)/(b - pole)),

    which works on asymmetric intervals. The subtracted integrand has a
    removable singularity; inside a machine-scaled window around the pole
    it is replaced by its limit -g'(pole), estimated by a symmetric
    difference.
    """
    if not (a < pole < b):
        raise PoleOutsideInterval(
            f"pole {pole!r} not strictly inside ({a!r}, {b!r})"
        )
    gp = float(g(pole))
    if not math.isfinite(gp):
        raise NonFiniteIntegrand(f"integrand not finite at the pole {pole!r}")
    # window and step scale with the pole magnitude to stay meaningful
    # for poles far from unity
    delta = max(1.0, abs(pole)) * float(np.finfo(float).eps) ** (1.0 / 3.0)
    slope = (float(g(pole + delta)) - float(g(pole - delta))) / (2.0 * delta)

    def subtracted(w: float) -> float:
        d = pole - w
        if abs(d) <= delta:
            return -slope
        return (float(g(w)) - gp) / d

    core = integrate(subtracted, a, pole, spec, breakpoints) + integrate(
        subtracted, pole, b, spec, breakpoints
    )
    return core + gp * math.log((pole - a) / (b - pole))


def solve_volterra(
    kernel: Callable[[float], complex],
    t_max: float,
    dt: float,
    growth_tolerance: float = 0.05,
) -> AmplitudeTrajectory:
    """Solve dc/dt = integral_0^t kernel(t - t') c(t') dt' with c(0) = 1.

    The memory integral is discretized with product-trapezoidal weights
    and the time step is the implicit trapezoidal rule; since the equation
    is linear the implicit stage is solved exactly. Global error is
    O(dt^2).

    Parameters
    ----------
    kernel : callable
        Convolution kernel gamma(tau), sampled on the dt grid.
    t_max, dt : float
        Horizon and requested step; the horizon is tiled with
        n = round(t_max / dt) equal steps, so the grid ends exactly at
        t_max.
    growth_tolerance : float
        For kernels with Re gamma(0) <= 0 the continuum solution obeys
        |c| <= 1; if |c| exceeds 1 + growth_tolerance the step is judged
        unstable and StepTooLarge is raised.

    Returns
    -------
    AmplitudeTrajectory
    """
    if dt <= 0:
        raise ValueError("solve_volterra: dt must be > 0")
    n = int(round(t_max / dt))
    if n < 1:
        raise ValueError("solve_volterra: t_max must be >= dt")
    dt = t_max / n  # tile the horizon exactly
    gam = np.array([complex(kernel(j * dt)) for j in range(n + 1)])
    if not np.all(np.isfinite(gam.view(float))):
        raise ValueError("solve_volterra: kernel not finite on the grid")
    gam_rev = gam[::-1].copy()  # gam_rev[n - k] = gamma(k*dt)

    decaying = gam[0].real <= 0.0
    bound = 1.0 + growth_tolerance
    c = np.empty(n + 1, dtype=complex)
    c[0] = 1.0
    denom = 1.0 - 0.25 * dt * dt * gam[0]
    memory = 0.0 + 0.0j  # trapezoid value of the integral at the previous node
    for m in range(1, n + 1):
        # partial sum over known history: sum_{j<m} gamma((m-j) dt) c_j
        hist = np.dot(gam_rev[n - m : n], c[:m])
        tail = dt * (hist - 0.5 * gam[m] * c[0])
        c[m] = (c[m - 1] + 0.5 * dt * (memory + tail)) / denom
        memory = tail + 0.5 * dt * gam[0] * c[m]
        mag = abs(c[m])
        if not math.isfinite(mag):
            raise NonFiniteState(f"amplitude not finite at t={m * dt!r}")
        if decaying and mag > bound:
            raise StepTooLarge(
                f"|c|={mag:.4f} exceeded {bound:.4f} at t={m * dt:.6g}; "
                "reduce dt"
            )
    t = np.arange(n + 1) * dt
    return AmplitudeTrajectory(t=t, c=c)


def step_ode(
    f: Callable[[float, np.ndarray], np.ndarray],
    state0,
    t_max: float,
    dt: float,
) -> OdeTrajectory:
    """Fixed-step classical 4th-order Runge-Kutta integration.

    ``f(t, y)`` returns dy/dt with the same shape as ``y``. Global error
    is O(dt^4). Raises NonFiniteState as soon as a step produces NaN or
    infinity.
    """
    if dt <= 0:
        raise ValueError("step_ode: dt must be > 0")
    n = int(round(t_max / dt))
    if n < 1:
        raise ValueError("step_ode: t_max must be >= dt")
    dt = t_max / n  # tile the horizon exactly
    y = np.asarray(state0)
    if not np.issubdtype(y.dtype, np.inexact):
        y = y.astype(float)
    states = np.empty((n + 1,) + y.shape, dtype=y.dtype)
    states[0] = y
    half = 0.5 * dt
    for i in range(n):
        t = i * dt
        k1 = np.asarray(f(t, y))
        k2 = np.asarray(f(t + half, y + half * k1))
        k3 = np.asarray(f(t + half, y + half * k2))
        k4 = np.asarray(f(t + dt, y + dt * k3))
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y.view(float) if np.iscomplexobj(y) else y)):
            raise NonFiniteState(f"state not finite at t={t + dt!r}")
        states[i + 1] = y
    t_grid = np.arange(n + 1) * dt
    return OdeTrajectory(t=t_grid, states=states)
