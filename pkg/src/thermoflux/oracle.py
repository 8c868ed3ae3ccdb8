"""Exhaustive ground truth on small finite bath models.

Nothing in here calls the closed forms of :mod:`thermoflux.process` or the
smoothing routines of :mod:`thermoflux.divergence`.  Forward and reverse
probabilities are obtained by laying out every bath-system microstate of each
energy shell, assigning them to shells of the other side, and summing
microstate weights.  Smoothing optimality is checked by enumerating every
subset of levels.

All arithmetic is exact; the oracle refuses (rather than approximates) when a
model is too large.
"""
from __future__ import annotations

import itertools
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .core import BathModel, DiagonalState, EnergySpectrum, ThermalContext
from .errors import InfeasibleError, ResourceLimitError, ThermofluxError
from .exact import ExactEnergy, ExactLog

MAX_LEVELS = 12
DEFAULT_MAX_MICROSTATES = 10**7
ENV_MAX_MICROSTATES = "THERMOFLUX_MAX_MICROSTATES"


def max_microstates() -> int:
    raw = os.environ.get(ENV_MAX_MICROSTATES)
    if raw is None:
        return DEFAULT_MAX_MICROSTATES
    try:
        return int(raw)
    except ValueError:
        raise ThermofluxError(f"{ENV_MAX_MICROSTATES} must be an integer, got {raw!r}") from None


def _require_exact(ctx: ThermalContext) -> None:
    if not ctx.exact:
        raise ThermofluxError("the oracle works in exact arithmetic only")


def _boltzmann(ctx: ThermalContext, k: int) -> Fraction:
    return ctx.base ** (-Fraction(ctx.spectrum[k]).numerator)


def _work_factor(ctx: ThermalContext, w) -> Fraction:
    if isinstance(w, ExactEnergy):
        if w.base != ctx.base:
            raise ThermofluxError("work value and context use different bases")
        return w.factor
    w = Fraction(w)
    if w.denominator != 1:
        raise ThermofluxError("work must be an integer or an ExactEnergy")
    return ctx.base ** (-w.numerator)


def _as_count(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise InfeasibleError(f"{what} = {x} is not a whole number of microstates")
    return x.numerator


@dataclass(frozen=True)
class FiniteModel:
    """Work system plus a finite exponential bath with whole-number shells.

    The bath shell paired with system level ``i`` before the process holds
    ``G * r**(-E_i)`` microstates; after storing ``w`` it holds
    ``G * r**(-E_j) * exp(-beta*w)``.  Both must be positive integers.
    """

    rho: DiagonalState
    ctx: ThermalContext
    bath: BathModel
    w: object

    def __post_init__(self):
        _require_exact(self.ctx)
        if not self.bath.exact or self.bath.beta != self.ctx.beta:
            raise ThermofluxError("bath must be exact with the context's beta")
        object.__setattr__(self, "rho", self.ctx.check_state(self.rho))
        for i, g in enumerate(self.initial_shells):
            _as_count(g, f"g(E-E_{i})")
        for j, g in enumerate(self.final_shells):
            _as_count(g, f"g(E-E_{j}-w)")

    @property
    def spectrum(self) -> EnergySpectrum:
        return self.ctx.spectrum

    @property
    def initial_shells(self) -> tuple[Fraction, ...]:
        G = self.bath.G
        return tuple(G * _boltzmann(self.ctx, k) for k in range(len(self.spectrum)))

    @property
    def final_shells(self) -> tuple[Fraction, ...]:
        f = _work_factor(self.ctx, self.w)
        return tuple(g * f for g in self.initial_shells)

    @property
    def shells(self) -> list[tuple[str, int, int]]:
        """Every (side, level, microstate count) pair of the block decomposition."""
        return [("initial", k, int(g)) for k, g in enumerate(self.initial_shells)] + [
            ("final", k, int(g)) for k, g in enumerate(self.final_shells)
        ]

    @property
    def total_microstates(self) -> int:
        return sum(c for _, _, c in self.shells)


@dataclass(frozen=True)
class OracleResult:
    p_forward: Fraction
    p_reverse: Fraction
    ratio: Fraction
    forward_counts: dict
    reverse_counts: dict


def _select_microstates(rho: DiagonalState, shells: Sequence[Fraction], epsilon: Fraction):
    """Fewest microstates of largest weight whose total weight is ``1 - epsilon``.

    Returns ``[(level, count), ...]`` in selection order with fractional
    counts allowed, so callers can see which scale makes them whole.
    """
    blocks = [(rho.probs[k] / shells[k], k) for k in range(len(shells)) if rho.probs[k] > 0]
    blocks.sort(key=lambda t: (-t[0], t[1]))
    need = rho.total - epsilon
    picked = []
    for weight, k in blocks:
        if need <= 0:
            break
        whole = shells[k]
        take = min(whole, need / weight)
        picked.append((k, take))
        need -= take * weight
    return picked


def _overlaps(sources: Sequence[tuple[int, int]], sinks: Sequence[tuple[int, int]]) -> dict:
    """Place microstates of the sources, in order, onto consecutive sink slots.

    Both sides are laid out as half-open intervals on one line of microstate
    indices; the count moved from source ``a`` to sink ``b`` is the length of
    the intersection of their intervals.
    """
    out: dict = {}
    src_iv, pos = [], 0
    for label, n in sources:
        src_iv.append((label, pos, pos + n))
        pos += n
    snk_iv, pos = [], 0
    for label, n in sinks:
        snk_iv.append((label, pos, pos + n))
        pos += n
    if src_iv and src_iv[-1][2] > pos:
        raise InfeasibleError("more microstates to place than sink slots")
    for a, a0, a1 in src_iv:
        for b, b0, b1 in snk_iv:
            n = min(a1, b1) - max(a0, b0)
            if n > 0:
                out[(a, b)] = out.get((a, b), 0) + n
    return out


def oracle_forward_reverse(model: FiniteModel, epsilon=0, delta=0) -> OracleResult:
    """Forward and reverse work probabilities by explicit microstate placement.

    Forward: the heaviest microstates carrying weight ``1 - epsilon`` are
    moved into the final shells with the battery raised by ``w``; they must
    fill exactly a ``1 - epsilon`` share of those shells (for ``epsilon = 0``
    this is the usual equality of transportation totals).  Reverse: starting
    from the Gibbs state with the battery at ``w``, the shells paired with
    level ``j`` send ``g(E - E_j - W_delta) = (1 - delta) * g(E - E_j - w)``
    microstates back to the initial shells.
    """
    ctx, rho = model.ctx, model.rho
    epsilon, delta = Fraction(epsilon), Fraction(delta)
    if not (0 <= epsilon < 1 and 0 <= delta < 1):
        raise ThermofluxError("epsilon and delta must lie in [0, 1)")
    n = len(model.spectrum)
    if n > MAX_LEVELS:
        raise ResourceLimitError(f"{n} levels exceeds the oracle limit of {MAX_LEVELS}")
    cap = max_microstates()
    if model.total_microstates > cap:
        raise ResourceLimitError(
            f"{model.total_microstates} microstates exceeds the cap of {cap} "
            f"(override with {ENV_MAX_MICROSTATES})"
        )

    g_init = [_as_count(g, "initial shell") for g in model.initial_shells]
    g_final = [_as_count(g, "final shell") for g in model.final_shells]

    picked = [(k, _as_count(c, f"selected microstates of level {k}")) for k, c in _select_microstates(rho, model.initial_shells, epsilon)]
    n_selected = sum(c for _, c in picked)
    if n_selected != (1 - epsilon) * sum(g_final):
        raise InfeasibleError(
            f"{n_selected} selected microstates do not fill a {1 - epsilon} share "
            f"of the {sum(g_final)} final-shell microstates; w is not the saturating value"
        )
    fwd = _overlaps(picked, list(enumerate(g_final)))
    p_forward = sum((c * rho.probs[i] / g_init[i] for (i, _), c in fwd.items()), Fraction(0))

    Z = sum(_boltzmann(ctx, k) for k in range(n))
    gibbs = [_boltzmann(ctx, k) / Z for k in range(n)]
    g_back = [_as_count(g * (1 - delta), "reverse shell") for g in g_final]
    rev = _overlaps(list(enumerate(g_back)), list(enumerate(g_init)))
    p_reverse = sum((c * gibbs[j] / g_final[j] for (j, _), c in rev.items()), Fraction(0))

    return OracleResult(
        p_forward=p_forward,
        p_reverse=p_reverse,
        ratio=p_forward / p_reverse,
        forward_counts=fwd,
        reverse_counts=rev,
    )


def saturating_work(rho: DiagonalState, ctx: ThermalContext, epsilon=0) -> ExactEnergy:
    """The ``w`` at which selected microstates fill a ``1 - epsilon`` share of the final shells.

    Computed by counting at ``G = 1`` (fractional counts allowed).
    """
    _require_exact(ctx)
    rho = ctx.check_state(rho)
    epsilon = Fraction(epsilon)
    shells = [_boltzmann(ctx, k) for k in range(len(ctx.spectrum))]
    selected = sum(c for _, c in _select_microstates(rho, shells, epsilon))
    return ExactEnergy(selected / ((1 - epsilon) * sum(shells)), ctx.base)


def finite_model(rho, ctx, w=None, *, epsilon=0, delta=0, G=1) -> FiniteModel:
    """Smallest multiple of ``G`` making every count the oracle needs whole.

    ``w`` defaults to :func:`saturating_work`.
    """
    _require_exact(ctx)
    rho = ctx.check_state(rho)
    if w is None:
        w = saturating_work(rho, ctx, epsilon)
    epsilon, delta, G = Fraction(epsilon), Fraction(delta), Fraction(G)
    f = _work_factor(ctx, w)
    unit = [_boltzmann(ctx, k) for k in range(len(ctx.spectrum))]
    needed = list(unit) + [u * f for u in unit] + [u * f * (1 - delta) for u in unit]
    needed += [c for _, c in _select_microstates(rho, unit, epsilon)]
    scale = math.lcm(*((G * x).denominator for x in needed))
    return FiniteModel(rho, ctx, BathModel(ctx.beta, G * scale), w)


def oracle_smoothing(rho: DiagonalState, ctx: ThermalContext, epsilon):
    """Best support reduction over all subsets of levels with removed mass <= epsilon.

    Returns ``ln(kept width / Z)`` for the smallest reachable kept width.
    """
    rho = ctx.check_state(rho)
    n = len(ctx.spectrum)
    if n > MAX_LEVELS:
        raise ResourceLimitError(f"{n} levels exceeds the oracle limit of {MAX_LEVELS}")
    eps = ctx.num(epsilon)
    if not 0 <= eps < rho.total:
        raise ThermofluxError("epsilon out of range")
    support = [k for k in range(n) if rho.probs[k] > 0]
    if not support:
        raise ThermofluxError("state has empty support")
    tol = ctx.tol
    best = None
    for r in range(len(support) + 1):
        for removed in itertools.combinations(support, r):
            if sum(rho.probs[k] for k in removed) > eps + tol:
                continue
            kept = sum(ctx.weights[k] for k in support if k not in removed)
            if best is None or kept < best:
                best = kept
    return ctx.log(best / ctx.Z)


@dataclass(frozen=True)
class Instance:
    """A random exact-mode test instance."""

    energies: tuple[int, ...]
    probs: tuple[Fraction, ...]
    base: int

    @property
    def ctx(self) -> ThermalContext:
        return ThermalContext(EnergySpectrum(self.energies), ExactLog(self.base))

    @property
    def state(self) -> DiagonalState:
        return DiagonalState.from_levels(self.energies, self.probs)


def random_instance(
    rng: random.Random,
    n_max: int = 6,
    energy_max: int = 6,
    bases: Sequence[int] = (2, 3),
    max_denominator: int = 64,
) -> Instance:
    """Integer energies in ``[0, energy_max]``, ``beta = ln 2`` or ``ln 3``,
    probabilities with a common denominator of at most ``max_denominator``.

    About a quarter of the states get one level emptied so that partial
    supports are exercised.
    """
    n = rng.randint(1, n_max)
    energies = tuple(rng.randint(0, energy_max) for _ in range(n))
    den = rng.randint(max(n, 2), max_denominator)
    parts = [1] * n
    for _ in range(den - n):
        parts[rng.randrange(n)] += 1
    if n > 1 and rng.random() < 0.25:
        a, b = rng.sample(range(n), 2)
        parts[b] += parts[a]
        parts[a] = 0
    probs = tuple(Fraction(p, den) for p in parts)
    return Instance(energies, probs, rng.choice(tuple(bases)))


def random_instances(seed: int, count: int, **kwargs) -> Iterator[Instance]:
    rng = random.Random(seed)
    for _ in range(count):
        yield random_instance(rng, **kwargs)
