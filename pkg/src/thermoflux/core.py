"""Spectra, diagonal states, thermal contexts, bath and battery models.

Units: ``k_B = 1`` so ``kT = 1/beta``.  Two arithmetic modes coexist:

* exact mode, selected by passing ``beta`` as an :class:`~thermoflux.exact.ExactLog`
  (``beta = ln(r)``), integer energies and rational probabilities.  All
  partition sums, Gibbs weights and degeneracies are Fractions.
* float mode, selected by a plain real ``beta``; binary64 with a 1e-12
  tolerance on normalization checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import NonPhysicalStateError, SpectrumMismatchError, ThermofluxError
from .exact import ExactEnergy, ExactLog, is_rational, parse_rational

FLOAT_TOL = 1e-12


def _energy_key(e) -> float:
    return float(e)


class EnergySpectrum:
    """Non-degenerate system levels stored in ascending energy order.

    Repeated values model degenerate levels.  ``index[k]`` is the position the
    ``k``-th stored level had in the caller's input; sorting is stable so
    equal energies keep their input order.
    """

    __slots__ = ("energies", "index")

    def __init__(self, energies: Sequence):
        energies = tuple(energies)
        if not energies:
            raise ThermofluxError("spectrum must contain at least one level")
        for e in energies:
            if isinstance(e, bool) or not math.isfinite(float(e)):
                raise ThermofluxError(f"invalid energy {e!r}")
        order = sorted(range(len(energies)), key=lambda k: _energy_key(energies[k]))
        object.__setattr__(self, "energies", tuple(energies[k] for k in order))
        object.__setattr__(self, "index", tuple(order))

    def __setattr__(self, name, value):
        raise AttributeError("EnergySpectrum is immutable")

    def __len__(self) -> int:
        return len(self.energies)

    def __iter__(self):
        return iter(self.energies)

    def __getitem__(self, k):
        return self.energies[k]

    def __eq__(self, other):
        if not isinstance(other, EnergySpectrum):
            return NotImplemented
        return self.energies == other.energies and self.index == other.index

    def __hash__(self):
        return hash((self.energies, self.index))

    def __repr__(self):
        return f"EnergySpectrum({list(self.energies)!r})"

    def reorder(self, values: Sequence) -> tuple:
        """Permute per-level values given in input order into stored order."""
        values = tuple(values)
        if len(values) != len(self):
            raise ThermofluxError(
                f"expected {len(self)} values, got {len(values)}"
            )
        return tuple(values[k] for k in self.index)


@dataclass(frozen=True)
class DiagonalState:
    """Occupation probabilities over a spectrum, aligned with its stored order.

    Subnormalized states (smoothed states) are allowed; ``physical`` tells
    whether the total is one within the tolerance of the arithmetic mode.
    """

    spectrum: EnergySpectrum
    probs: tuple

    def __post_init__(self):
        probs = tuple(self.probs)
        if len(probs) != len(self.spectrum):
            raise ThermofluxError(
                f"{len(probs)} probabilities for {len(self.spectrum)} levels"
            )
        if all(is_rational(p) for p in probs):
            probs = tuple(Fraction(p) for p in probs)
        else:
            probs = tuple(float(p) for p in probs)
        if any(p < 0 for p in probs):
            raise NonPhysicalStateError("negative probability")
        object.__setattr__(self, "probs", probs)
        if self.total > 1 + self.tol:
            raise NonPhysicalStateError(f"total probability {float(self.total)} exceeds 1")

    @classmethod
    def from_levels(cls, energies: Sequence, probs: Sequence) -> "DiagonalState":
        """Build from energies and probabilities listed in the same (any) order."""
        spectrum = EnergySpectrum(energies)
        return cls(spectrum, spectrum.reorder(probs))

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.probs)

    @property
    def tol(self):
        return 0 if self.exact else FLOAT_TOL

    @property
    def total(self):
        return sum(self.probs, Fraction(0) if self.exact else 0.0)

    @property
    def physical(self) -> bool:
        return abs(self.total - 1) <= self.tol

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, p in enumerate(self.probs) if p > 0)

    def as_float(self) -> "DiagonalState":
        return DiagonalState(self.spectrum, tuple(float(p) for p in self.probs))

    def as_exact(self) -> "DiagonalState":
        return DiagonalState(self.spectrum, tuple(parse_rational(p) for p in self.probs))

    def in_input_order(self) -> tuple:
        out = [None] * len(self.probs)
        for k, orig in enumerate(self.spectrum.index):
            out[orig] = self.probs[k]
        return tuple(out)


def parse_beta(beta):
    """Accept a positive real, an ExactLog, or a string such as ``"ln(3/2)"``."""
    if isinstance(beta, ExactLog):
        out = beta
    elif isinstance(beta, str) and beta.strip().startswith("ln"):
        out = ExactLog.parse(beta)
    else:
        try:
            out = float(beta)
        except (TypeError, ValueError):
            raise ThermofluxError(f"cannot parse beta {beta!r}") from None
        if not math.isfinite(out):
            raise ThermofluxError("beta must be finite")
    if (isinstance(out, ExactLog) and out.argument <= 1) or (
        not isinstance(out, ExactLog) and out <= 0
    ):
        raise ThermofluxError(f"beta must be positive, got {out}")
    return out


class ThermalContext:
    """Inverse temperature plus the Gibbs state it induces on a spectrum."""

    __slots__ = ("spectrum", "beta", "base", "weights", "Z", "gibbs")

    def __init__(self, spectrum: EnergySpectrum, beta):
        beta = parse_beta(beta)
        set_ = object.__setattr__
        set_(self, "spectrum", spectrum)
        set_(self, "beta", beta)
        if isinstance(beta, ExactLog):
            base = beta.argument
            weights = tuple(ExactEnergy.from_value(e, base).factor for e in spectrum)
            Z = sum(weights, Fraction(0))
        else:
            base = None
            weights = tuple(math.exp(-beta * float(e)) for e in spectrum)
            Z = math.fsum(weights)
        if not Z > 0:
            raise ThermofluxError("partition function underflowed to zero")
        set_(self, "base", base)
        set_(self, "weights", weights)
        set_(self, "Z", Z)
        set_(self, "gibbs", DiagonalState(spectrum, tuple(w / Z for w in weights)))

    def __setattr__(self, name, value):
        raise AttributeError("ThermalContext is immutable")

    def __repr__(self):
        return f"ThermalContext(beta={self.beta!s}, spectrum={self.spectrum!r})"

    @property
    def exact(self) -> bool:
        return self.base is not None

    @property
    def tol(self):
        return 0 if self.exact else FLOAT_TOL

    @property
    def beta_float(self) -> float:
        return float(self.beta)

    @property
    def kT(self) -> float:
        return 1.0 / self.beta_float

    def num(self, x):
        """Coerce a scalar parameter into this context's arithmetic."""
        if self.exact:
            return parse_rational(x)
        return float(x)

    def boltzmann(self, energy):
        """``exp(-beta*energy)``; exact for integers and ExactEnergy values."""
        if self.exact:
            if isinstance(energy, float):
                raise ThermofluxError(
                    f"float energy {energy!r} in exact mode; snap it first"
                )
            return ExactEnergy.from_value(energy, self.base).factor
        return math.exp(-self.beta * float(energy))

    def log(self, x):
        if self.exact:
            return ExactLog(x)
        return math.log(x)

    def energy_from_factor(self, factor):
        """The energy whose Boltzmann factor is ``factor``."""
        if self.exact:
            return ExactEnergy(factor, self.base)
        return 0.0 - math.log(factor) / self.beta

    def snap_energy(self, energy, max_denominator: int = 10**6):
        """Nearest exactly representable energy (rational Boltzmann factor).

        Returns ``energy`` unchanged when already representable.
        """
        if not self.exact or isinstance(energy, ExactEnergy):
            return energy
        if is_rational(energy) and Fraction(energy).denominator == 1:
            return ExactEnergy.from_value(energy, self.base)
        f = Fraction(math.exp(-self.beta_float * float(energy))).limit_denominator(max_denominator)
        return ExactEnergy(f, self.base)

    def check_state(self, state: DiagonalState) -> DiagonalState:
        """Validate spectrum agreement and return ``state`` in this context's arithmetic."""
        if state.spectrum != self.spectrum:
            raise SpectrumMismatchError("state and context use different spectra")
        if self.exact and not state.exact:
            return state.as_exact()
        if not self.exact and state.exact:
            return state.as_float()
        return state

    def support_weight(self, state: DiagonalState):
        """Truncated partition sum over the support of ``state``."""
        state = self.check_state(state)
        return sum((self.weights[k] for k in state.support), 0 * self.Z)


def make_thermal_context(spectrum: EnergySpectrum, beta) -> ThermalContext:
    if not isinstance(spectrum, EnergySpectrum):
        spectrum = EnergySpectrum(spectrum)
    return ThermalContext(spectrum, beta)


@dataclass(frozen=True)
class BathModel:
    """Exponential bath: ``g(E - dE) = G * exp(-beta*dE)`` with no higher orders.

    ``G`` stands for the degeneracy at the reference total energy.  Physical
    ratios never depend on it; microstate counting needs it large enough that
    every degeneracy is a whole number.
    """

    beta: object
    G: object = 1

    def __post_init__(self):
        object.__setattr__(self, "beta", parse_beta(self.beta))
        G = self.G
        G = Fraction(G) if is_rational(G) else float(G)
        if not G > 0:
            raise ThermofluxError("reference degeneracy G must be positive")
        object.__setattr__(self, "G", G)

    @property
    def exact(self) -> bool:
        return isinstance(self.beta, ExactLog) and isinstance(self.G, Fraction)

    def scaled(self, k) -> "BathModel":
        return BathModel(self.beta, self.G * k)


def bath_degeneracy(bath: BathModel, deltaE):
    """Degeneracy of the bath shell left when the system holds ``deltaE``."""
    if bath.exact and not isinstance(deltaE, float):
        return bath.G * ExactEnergy.from_value(deltaE, bath.beta.argument).factor
    return float(bath.G) * math.exp(-float(bath.beta) * float(deltaE))


@dataclass(frozen=True)
class Battery:
    """Battery with gap ``w`` left at ``|w>`` with probability ``1 - epsilon``."""

    w: object
    epsilon: object = 0

    def __post_init__(self):
        if float(self.w) < 0:
            raise ThermofluxError("battery gap must be non-negative")
        if not 0 <= self.epsilon < 1:
            raise ThermofluxError("failure probability must lie in [0, 1)")

    @property
    def final_state(self) -> tuple[tuple[object, str], tuple[object, str]]:
        return ((1 - self.epsilon, "w"), (self.epsilon, "orthogonal"))
