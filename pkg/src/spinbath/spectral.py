"""Spectral densities of the spin-environment coupling.

The environment is a continuum of oscillators; after the angular and
polarization sums every observable in this package depends on the
coupling only through the scalar spectral density

    J(omega) = (2 pi / c^3) * omega^2 * |f(omega)|^2 >= 0,

where f is the per-mode coupling amplitude. J is parameterized directly
(the standard spin-boson families) and |f| is derived from it; the phase
of f is unobservable here and taken to be zero.

Families
--------
ohmic       J = alpha * omega^s * omega_c^(1-s) * exp(-omega/omega_c)
lorentzian  J = alpha * gamma0 * omega / ((omega^2 - omega_r^2)^2
                                          + gamma0^2 omega^2)
flat        J = j0 on [lo, hi], zero elsewhere; handy because a window
            symmetric about the transition frequency forces a vanishing
            frequency shift
null        J = 0 (decoupled spin)

Each model knows a cutoff above which its remaining spectral weight is
provably negligible, so that semi-infinite integrals can be truncated
deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn, gammaincc

from .numerics import QuadratureSpec


class NegativeFrequency(ValueError):
    """Spectral densities are defined for omega >= 0 only."""


class ZeroFrequency(ValueError):
    """Operation undefined at omega = 0 (or below)."""


@dataclass(frozen=True)
class PhysicalConstants:
    """Unit system: action, speed, and Boltzmann constants.

    Defaults to natural units hbar = c = k_B = 1; all three must be
    strictly positive.
    """

    hbar: float = 1.0
    c: float = 1.0
    k_B: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "c", "k_B"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name}: must be > 0")


@dataclass(frozen=True)
class SpectralModel:
    """Base class; concrete families implement ``density`` and the tail
    bound. Instances are immutable and hashable (usable as cache keys)."""

    constants: PhysicalConstants = field(default=PhysicalConstants(), kw_only=True)

    def density(self, omega):
        raise NotImplementedError

    def tail_bound(self, cutoff: float) -> float:
        """Upper bound on integral of J(w)(1+w) dw over [cutoff, inf)."""
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Interior frequencies where J is non-smooth (quadrature hints)."""
        return ()

    def support_hint(self) -> tuple[float, float]:
        """Rough interval carrying the bulk of the spectral weight."""
        return (0.0, 1.0)


@dataclass(frozen=True)
class NullModel(SpectralModel):
    """Decoupled spin: J = 0."""

    def density(self, omega):
        _check_frequency(omega)
        return np.zeros_like(np.asarray(omega, dtype=float))[()]

    def tail_bound(self, cutoff):
        return 0.0


@dataclass(frozen=True)
class OhmicModel(SpectralModel):
    """Power-law density with exponential cutoff."""

    alpha: float
    s: float = 1.0
    omega_c: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha: must be >= 0")
        if not (self.s > 0):
            raise ValueError("s: must be > 0")
        if not (self.omega_c > 0):
            raise ValueError("omega_c: must be > 0")

    def density(self, omega):
        _check_frequency(omega)
        w = np.asarray(omega, dtype=float)
        wc = self.omega_c
        return (self.alpha * w**self.s * wc ** (1.0 - self.s) * np.exp(-w / wc))[()]

    def tail_bound(self, cutoff):
        # exact tails of w^s e^{-w/wc} and w^{s+1} e^{-w/wc} via the
        # upper incomplete gamma function
        x = cutoff / self.omega_c
        wc = self.omega_c
        g1 = gammaincc(self.s + 1.0, x) * gamma_fn(self.s + 1.0)
        g2 = gammaincc(self.s + 2.0, x) * gamma_fn(self.s + 2.0)
        return self.alpha * (wc**2 * g1 + wc**3 * g2)

    def support_hint(self):
        return (0.0, (self.s + 6.0) * self.omega_c)


@dataclass(frozen=True)
class LorentzianModel(SpectralModel):
    """Resonant density peaked near omega_r with width gamma0."""

    alpha: float
    omega_r: float = 1.0
    gamma0: float = 0.1

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha: must be >= 0")
        if not (self.omega_r > 0):
            raise ValueError("omega_r: must be > 0")
        if not (self.gamma0 > 0):
            raise ValueError("gamma0: must be > 0")

    def density(self, omega):
        _check_frequency(omega)
        w = np.asarray(omega, dtype=float)
        num = self.alpha * self.gamma0 * w
        den = (w * w - self.omega_r**2) ** 2 + self.gamma0**2 * w * w
        return (num / den)[()]

    def tail_bound(self, cutoff):
        # for w >= max(2 omega_r, 1): (w^2-wr^2)^2 >= (3/4)^2 w^4, so
        # J(1+w) <= (16/9) a g (1/w^3 + 1/w^2) and the tail integrates
        # to at most (8/3) a g / cutoff
        if cutoff < max(2.0 * self.omega_r, 1.0):
            return math.inf
        return (8.0 / 3.0) * self.alpha * self.gamma0 / cutoff

    def support_hint(self):
        return (
            max(0.0, self.omega_r - 6.0 * self.gamma0),
            self.omega_r + 6.0 * self.gamma0 + 1.0,
        )


@dataclass(frozen=True)
class FlatWindowModel(SpectralModel):
    """Constant density j0 on the window [omega_lo, omega_hi]."""

    j0: float
    omega_lo: float = 0.0
    omega_hi: float = 1.0

    def __post_init__(self):
        if self.j0 < 0:
            raise ValueError("j0: must be >= 0")
        if self.omega_lo < 0:
            raise ValueError("lo: must be >= 0")
        if not (self.omega_hi > self.omega_lo):
            raise ValueError("hi: must be > lo")

    def density(self, omega):
        _check_frequency(omega)
        w = np.asarray(omega, dtype=float)
        inside = (w >= self.omega_lo) & (w <= self.omega_hi)
        return np.where(inside, self.j0, 0.0)[()]

    def tail_bound(self, cutoff):
        if cutoff >= self.omega_hi:
            return 0.0
        width = self.omega_hi - max(cutoff, self.omega_lo)
        return self.j0 * width * (1.0 + self.omega_hi)

    def breakpoints(self):
        return (self.omega_lo, self.omega_hi)

    def support_hint(self):
        return (self.omega_lo, self.omega_hi)


def _check_frequency(omega) -> None:
    if np.any(np.asarray(omega) < 0):
        raise NegativeFrequency("spectral density requires omega >= 0")


def spectral_density(model: SpectralModel, omega):
    """J(omega); accepts scalars or arrays of nonnegative frequencies."""
    return model.density(omega)


def coupling_magnitude(model: SpectralModel, omega):
    """|f(omega)| = sqrt(c^3 J(omega) / (2 pi omega^2)) for omega > 0.

    Undefined at omega = 0 whenever J grows slower than omega^2 there,
    so the operation rejects omega <= 0 outright.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ZeroFrequency("coupling magnitude requires omega > 0")
    c3 = model.constants.c**3
    return (np.sqrt(c3 * model.density(w) / (2.0 * math.pi * w * w)))[()]


def tail_cutoff(model: SpectralModel, abs_tol: float) -> float:
    """Frequency above which the remaining weight of J(w)(1+w) is < abs_tol.

    Any cutoff satisfying the bound is acceptable; this one is found by
    geometric growth from the model's natural scale, so it is within a
    factor 1.5 of the smallest such cutoff of the bound used.
    """
    if not (abs_tol > 0):
        raise ValueError("abs_tol: must be > 0")
    if isinstance(model, NullModel):
        return 0.0
    if isinstance(model, FlatWindowModel):
        return model.omega_hi
    if isinstance(model, LorentzianModel):
        start = max(2.0 * model.omega_r, 1.0)
        return max(start, (8.0 / 3.0) * model.alpha * model.gamma0 / abs_tol)
    omega = max(model.support_hint()[1] / 3.0, 1e-6)
    for _ in range(400):
        if model.tail_bound(omega) < abs_tol:
            return omega
        omega *= 1.5
    raise ValueError("tail_cutoff: bound not met; model tail decays too slowly")


def effective_cutoff(model: SpectralModel, spec: QuadratureSpec) -> float:
    """Truncation point actually used for [0, inf) integrals."""
    return min(spec.upper_cutoff, tail_cutoff(model, spec.abs_tol))


def quadrature_hints(model: SpectralModel) -> tuple[float, ...]:
    """Frequencies worth splitting at: genuine non-smooth points plus the
    edges of the region carrying the bulk of the spectral weight.

    Adaptive rules sample a wide interval coarsely at first; on domains
    much wider than the structure of J they can step right over a narrow
    peak and accept a spuriously smooth answer. Splitting at these hints
    guarantees the structure is seen.
    """
    lo, hi = model.support_hint()
    return model.breakpoints() + tuple(x for x in (lo, hi) if x > 0)


_MODEL_GRAMMAR = {
    "ohmic": ("alpha", "s", "omega_c"),
    "lorentzian": ("alpha", "omega_r", "gamma0"),
    "flat": ("j0", "lo", "hi"),
    "null": (),
}


def parse_model(text: str, constants: PhysicalConstants | None = None) -> SpectralModel:
    """Parse the one-line model grammar shared with the CLI config.

    Examples: ``ohmic alpha=0.1 s=1 omega_c=10``,
    ``lorentzian alpha=0.05 omega_r=1 gamma0=0.2``,
    ``flat j0=0.5 lo=0.5 hi=1.5``, ``null``.
    """
    constants = constants or PhysicalConstants()
    tokens = text.split()
    if not tokens:
        raise ValueError("model: missing")
    kind = tokens[0].lower()
    if kind not in _MODEL_GRAMMAR:
        raise ValueError(
            f"model: unknown kind {kind!r} (expected one of "
            f"{', '.join(sorted(_MODEL_GRAMMAR))})"
        )
    expected = _MODEL_GRAMMAR[kind]
    params: dict[str, float] = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ValueError(f"model: malformed parameter {tok!r}")
        key, _, raw = tok.partition("=")
        if key not in expected:
            raise ValueError(f"model: unknown parameter {key!r} for {kind!r}")
        if key in params:
            raise ValueError(f"model: duplicate parameter {key!r}")
        try:
            params[key] = float(raw)
        except ValueError:
            raise ValueError(f"model: {key}: not a number: {raw!r}") from None
    missing = [k for k in expected if k not in params]
    if missing:
        raise ValueError(f"model: missing parameter(s): {', '.join(missing)}")
    if kind == "ohmic":
        return OhmicModel(
            alpha=params["alpha"], s=params["s"], omega_c=params["omega_c"],
            constants=constants,
        )
    if kind == "lorentzian":
        return LorentzianModel(
            alpha=params["alpha"], omega_r=params["omega_r"],
            gamma0=params["gamma0"], constants=constants,
        )
    if kind == "flat":
        return FlatWindowModel(
            j0=params["j0"], omega_lo=params["lo"], omega_hi=params["hi"],
            constants=constants,
        )
    return NullModel(constants=constants)


def format_model(model: SpectralModel) -> str:
    """Inverse of parse_model (constants not included)."""
    if isinstance(model, OhmicModel):
        return f"ohmic alpha={model.alpha:g} s={model.s:g} omega_c={model.omega_c:g}"
    if isinstance(model, LorentzianModel):
        return (
            f"lorentzian alpha={model.alpha:g} omega_r={model.omega_r:g} "
            f"gamma0={model.gamma0:g}"
        )
    if isinstance(model, FlatWindowModel):
        return f"flat j0={model.j0:g} lo={model.omega_lo:g} hi={model.omega_hi:g}"
    return "null"
