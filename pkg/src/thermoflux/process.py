"""Work values, the single-shot fluctuation relation and transition currents.

Closed forms live here.  In exact mode work values are
:class:`~thermoflux.exact.ExactEnergy` instances (their Boltzmann factor is
rational), and ratios and probabilities are Fractions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .core import BathModel, DiagonalState, ThermalContext, bath_degeneracy
from .divergence import d0, d0_smooth_fractional, smooth
from .errors import InfeasibleError, ThermofluxError
from .exact import ExactEnergy, ExactLog, is_rational, parse_rational
from .majorization import beta_order


def _unit_interval(name: str, x, exact: bool):
    x = parse_rational(x) if exact else float(x)
    if not 0 <= x < 1:
        raise ThermofluxError(f"{name} must lie in [0, 1), got {x}")
    return x


def deterministic_work(rho: DiagonalState, ctx: ThermalContext):
    """Work extracted with certainty when ``rho`` is driven to the Gibbs state.

    Equals ``-d0/beta``; it is the value making the deterministic ratio one.
    """
    return ctx.energy_from_factor(d0(rho, ctx).exp() if ctx.exact else math.exp(d0(rho, ctx)))


def w_delta(w, delta, beta):
    """Work shifted by the thermal work content of a delta-deterministic reverse run.

    ``W = w - ln(1 - delta)/beta``.  Exact when ``w`` is an ExactEnergy.
    """
    if isinstance(w, ExactEnergy):
        if isinstance(beta, ExactLog) and beta.argument != w.base:
            raise ThermofluxError("work value and beta use different bases")
        delta = _unit_interval("delta", delta, exact=True)
        return ExactEnergy(w.factor * (1 - delta), w.base)
    delta = _unit_interval("delta", delta, exact=False)
    return float(w) - math.log1p(-delta) / float(beta)


def _work(ctx: ThermalContext, w):
    if ctx.exact and not isinstance(w, ExactEnergy):
        if is_rational(w) and Fraction(w).denominator == 1:
            return ExactEnergy.from_value(w, ctx.base)
        raise ThermofluxError(
            f"work {w!r} has no exact Boltzmann factor; pass an ExactEnergy or snap it"
        )
    return w


def fluctuation_ratio(rho: DiagonalState, ctx: ThermalContext, w, epsilon, delta):
    """``P(w, forward) / P(-w, reverse) = exp(beta*W_delta + D0_eps)``."""
    w = _work(ctx, w)
    _unit_interval("epsilon", epsilon, ctx.exact)
    wd = w_delta(w, delta, ctx.beta)
    d = d0_smooth_fractional(rho, ctx, epsilon)
    if ctx.exact:
        return d.exp() / wd.factor
    try:
        return math.exp(ctx.beta * wd + d)
    except OverflowError:
        return math.inf


def forward_probability(epsilon):
    if is_rational(epsilon):
        eps = Fraction(epsilon)
    else:
        eps = float(epsilon)
    if not 0 <= eps < 1:
        raise ThermofluxError(f"epsilon must lie in [0, 1), got {epsilon}")
    return 1 - eps


class ReverseProbability(NamedTuple):
    value: object
    feasible: bool


def reverse_probability(rho, ctx, w, epsilon, delta) -> ReverseProbability:
    """Reverse-run probability implied by the relation; infeasible when above one."""
    eps = _unit_interval("epsilon", epsilon, ctx.exact)
    if ctx.exact:
        value = forward_probability(eps) / fluctuation_ratio(rho, ctx, w, eps, delta)
    else:
        # log space, so a huge w underflows to zero instead of overflowing the ratio
        wd = w_delta(float(w), delta, ctx.beta)
        value = math.exp(math.log1p(-eps) - ctx.beta * wd - d0_smooth_fractional(rho, ctx, eps))
    return ReverseProbability(value, bool(value <= 1 + ctx.tol))


def epsilon_work_bound(rho: DiagonalState, ctx: ThermalContext, epsilon):
    """Lower bound ``-kT*D0_eps + kT*ln(1-eps)`` on epsilon-deterministic work.

    At this value the reverse probability is exactly one.
    """
    eps = _unit_interval("epsilon", epsilon, ctx.exact)
    ratio = smooth(rho, ctx, eps).support_mass / ctx.Z
    return ctx.energy_from_factor(ratio / (1 - eps))


def thermal_work_content(ctx: ThermalContext, delta):
    """Work content of the Gibbs state once a weight ``delta`` is cut off.

    Beta-ordering the Gibbs state gives a flat staircase, so cutting ``delta``
    leaves width ``(1-delta)*Z`` and the content is ``-kT*ln(1-delta)``.
    """
    delta = _unit_interval("delta", delta, ctx.exact)
    res = smooth(ctx.gibbs, ctx, delta)
    return ctx.energy_from_factor(res.support_mass / ctx.Z)


def northwest_corner(supply: Sequence, demand: Sequence, *, partial: bool = False) -> list[list]:
    """Feasible transportation plan filled from the top-left corner.

    With ``partial`` the supply may fall short of the demand (sinks are then
    capacities); otherwise the totals must agree.
    """
    supply, demand = list(supply), list(demand)
    s_tot, d_tot = sum(supply), sum(demand)
    if partial:
        if s_tot > d_tot:
            raise InfeasibleError(f"supply {s_tot} exceeds capacity {d_tot}")
    elif s_tot != d_tot:
        raise InfeasibleError(f"supply total {s_tot} != demand total {d_tot}")
    plan = [[0 * s_tot for _ in demand] for _ in supply]
    i = j = 0
    while i < len(supply) and j < len(demand):
        q = min(supply[i], demand[j])
        plan[i][j] = q
        supply[i] -= q
        demand[j] -= q
        if supply[i] == 0:
            i += 1
        else:
            j += 1
    return plan


@dataclass(frozen=True)
class TransitionCurrentMatrix:
    """Counts ``k[i->j]`` of bath-system microstates moved between energy shells.

    Rows are initial levels in the support of the state, columns are final
    levels; both are spectrum positions.  Row ``i`` holds ``g(E - E_i)``
    microstates and column ``j`` receives ``g(E - E_j - w)``.
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    counts: tuple[tuple, ...]
    row_targets: tuple
    col_targets: tuple
    w: object

    @property
    def row_sums(self) -> tuple:
        return tuple(sum(r) for r in self.counts)

    @property
    def col_sums(self) -> tuple:
        return tuple(sum(r[c] for r in self.counts) for c in range(len(self.cols)))

    def satisfies_marginals(self, tol=0) -> bool:
        return all(abs(a - b) <= tol * max(1, abs(b)) for a, b in zip(self.row_sums, self.row_targets)) and all(
            abs(a - b) <= tol * max(1, abs(b)) for a, b in zip(self.col_sums, self.col_targets)
        )

    def entry(self, i: int, j: int):
        return self.counts[self.rows.index(i)][self.cols.index(j)]


def _check_bath(ctx: ThermalContext, bath: BathModel) -> None:
    if ctx.exact:
        if not bath.exact or bath.beta != ctx.beta:
            raise ThermofluxError("bath must be exact with the context's beta")
    elif not math.isclose(float(bath.beta), ctx.beta_float, rel_tol=1e-12):
        raise ThermofluxError("bath and context disagree on beta")


def degeneracy_scale(rho: DiagonalState, ctx: ThermalContext, bath: BathModel, w) -> int:
    """Smallest integer multiplier of ``G`` making every shell count whole (exact mode)."""
    rho = ctx.check_state(rho)
    _check_bath(ctx, bath)
    w = _work(ctx, w)
    spec = ctx.spectrum
    counts = [bath_degeneracy(bath, spec[i]) for i in rho.support]
    counts += [bath_degeneracy(bath, w + e) for e in spec]
    return math.lcm(*(Fraction(x).denominator for x in counts))


def build_transition_currents(
    rho: DiagonalState, ctx: ThermalContext, bath: BathModel, w, *, order: str = "beta"
) -> TransitionCurrentMatrix:
    """Microstate flows taking ``rho`` to the Gibbs state while storing ``w``.

    Uses the northwest-corner rule over beta-ordered rows and columns;
    ``order="reversed"`` fills from the opposite corner, giving a second,
    generally different, point of the same transportation polytope.
    """
    rho = ctx.check_state(rho)
    _check_bath(ctx, bath)
    w = _work(ctx, w)
    rows = [k for k in beta_order(rho, ctx).permutation if rho.probs[k] > 0]
    cols = list(beta_order(ctx.gibbs, ctx).permutation)
    if order == "reversed":
        rows.reverse()
        cols.reverse()
    elif order != "beta":
        raise ValueError(f"unknown order {order!r}")
    spec = ctx.spectrum
    row_t = [bath_degeneracy(bath, spec[i]) for i in rows]
    if ctx.exact:
        col_t = [bath_degeneracy(bath, w + spec[j]) for j in cols]
        scale = math.lcm(*(Fraction(x).denominator for x in row_t + col_t))
        if scale != 1:
            raise InfeasibleError(
                f"non-integral degeneracies; scale G by {scale} to count whole microstates"
            )
        row_t = [int(x) for x in row_t]
        col_t = [int(x) for x in col_t]
        counts = northwest_corner(row_t, col_t)
    else:
        col_t = [bath_degeneracy(bath, float(w) + float(spec[j])) for j in cols]
        s_r, s_c = math.fsum(row_t), math.fsum(col_t)
        if not math.isclose(s_r, s_c, rel_tol=1e-12):
            raise InfeasibleError(f"supply total {s_r} != demand total {s_c}")
        col_t[-1] += s_r - s_c
        counts = _float_northwest(row_t, col_t)
    return TransitionCurrentMatrix(
        rows=tuple(rows),
        cols=tuple(cols),
        counts=tuple(tuple(r) for r in counts),
        row_targets=tuple(row_t),
        col_targets=tuple(col_t),
        w=w,
    )


def _float_northwest(supply: list[float], demand: list[float]) -> list[list[float]]:
    # rounding residue below 1e-12 relative is treated as exhausted
    supply, demand = list(supply), list(demand)
    eps = 1e-12 * max(math.fsum(supply), 1.0)
    plan = [[0.0] * len(demand) for _ in supply]
    i = j = 0
    while i < len(supply) and j < len(demand):
        q = min(supply[i], demand[j])
        plan[i][j] += q
        supply[i] -= q
        demand[j] -= q
        if supply[i] <= eps:
            i += 1
        if demand[j] <= eps:
            j += 1
    return plan


@dataclass(frozen=True)
class WorkDistribution:
    """Probabilities of work values, plus the mass of the failure branch."""

    outcomes: dict = field(default_factory=dict)
    failure: object = 0

    @property
    def total(self):
        return sum(self.outcomes.values()) + self.failure

    def probability(self, w):
        return self.outcomes.get(w, 0)


def forward_distribution(
    currents: TransitionCurrentMatrix, rho: DiagonalState, bath: BathModel
) -> tuple[WorkDistribution, DiagonalState]:
    """Battery statistics and final system state produced by ``currents``.

    Each microstate of shell ``i`` carries ``P(E_i)/g(E - E_i)``.  Returns the
    work distribution and the induced final occupations ``P(E_j)``.
    """
    spec = rho.spectrum
    for i, target in zip(currents.rows, currents.row_targets):
        if rho.probs[i] <= 0:
            raise ThermofluxError(f"row {i} is outside the support of the state")
        g = bath_degeneracy(bath, spec[i])
        if (isinstance(g, Fraction) and g != target) or not math.isclose(float(g), float(target), rel_tol=1e-12):
            raise ThermofluxError(f"row {i} marginal does not match the bath degeneracy")
    if set(currents.rows) != set(rho.support):
        raise ThermofluxError("currents do not cover the support of the state")
    zero = Fraction(0) if rho.exact else 0.0
    final = [zero] * len(spec)
    p_w = zero
    for i, row, target in zip(currents.rows, currents.counts, currents.row_targets):
        per_state = rho.probs[i] / target
        for j, k in zip(currents.cols, row):
            final[j] += k * per_state
            p_w += k * per_state
    one = Fraction(1) if rho.exact else 1.0
    dist = WorkDistribution({currents.w: p_w}, failure=one - p_w)
    return dist, DiagonalState(spec, tuple(final))


def check_energy_conservation(currents: TransitionCurrentMatrix, ctx: ThermalContext) -> bool:
    """Every used channel balances battery gain against system and bath loss.

    Shell ``i`` sits at bath energy ``E - E_i`` and channel ``i -> j`` leaves
    the bath at ``E - E_j - w``; the exponential bath fixes the ratio of their
    degeneracies to ``exp(-beta*(E_j + w - E_i))``.
    """
    spec = ctx.spectrum
    for i, row, g_i in zip(currents.rows, currents.counts, currents.row_targets):
        for j, k, g_j in zip(currents.cols, row, currents.col_targets):
            if not k:
                continue
            if ctx.exact:
                expected = ctx.boltzmann(currents.w + spec[j] - spec[i])
                if Fraction(g_j, g_i) != expected:
                    return False
            else:
                expected = math.exp(-ctx.beta * (float(currents.w) + float(spec[j]) - float(spec[i])))
                if not math.isclose(g_j / g_i, expected, rel_tol=1e-9):
                    return False
    return True
