"""Renyi-0 relative entropy to the Gibbs state and its epsilon-smoothed variants.

Sign convention: ``d0`` returns ``ln(sum_{supp rho} exp(-beta*E)) - ln Z``,
which is never positive.  The conventional positive quantity
``-ln Tr[rho^0 tau]`` is available as :func:`d0_textbook`.  With this sign
the deterministic-work and fluctuation identities read without extra minus
signs.

In exact mode the logarithms come back as :class:`~thermoflux.exact.ExactLog`
so that identities can be checked by rational equality.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import DiagonalState, ThermalContext
from .errors import ThermofluxError
from .majorization import BetaOrdering, beta_order


@dataclass(frozen=True)
class SmoothingResult:
    """Outcome of removing an epsilon weight from the low end of the beta-order.

    The first ``kept_count`` beta-ordered levels are kept whole, the next one
    keeps ``fraction`` of its probability, the rest are dropped.
    ``support_mass`` is the Boltzmann width of what remains, with the boundary
    level counted fractionally.
    """

    kept_count: int
    fraction: object
    removed_weight: object
    support_mass: object
    smoothed_state: DiagonalState
    ordering: BetaOrdering

    @property
    def boundary(self) -> int | None:
        """Spectrum position of the fractionally kept level, if any."""
        perm = self.ordering.permutation
        return perm[self.kept_count] if self.kept_count < len(perm) else None


def _require_support(rho: DiagonalState) -> None:
    if not rho.support:
        raise ThermofluxError("state has empty support")


def _epsilon(rho: DiagonalState, ctx: ThermalContext, epsilon):
    eps = ctx.num(epsilon)
    if not 0 <= eps < rho.total:
        raise ThermofluxError(
            f"epsilon must satisfy 0 <= epsilon < {float(rho.total)}, got {epsilon}"
        )
    return eps


def d0(rho: DiagonalState, ctx: ThermalContext):
    rho = ctx.check_state(rho)
    _require_support(rho)
    return ctx.log(ctx.support_weight(rho) / ctx.Z)


def d0_textbook(rho: DiagonalState, ctx: ThermalContext):
    """``-ln Tr[rho^0 tau]``, the non-negative sign convention."""
    return -d0(rho, ctx)


def smooth(rho: DiagonalState, ctx: ThermalContext, epsilon) -> SmoothingResult:
    rho = ctx.check_state(rho)
    _require_support(rho)
    eps = _epsilon(rho, ctx, epsilon)
    order = beta_order(rho, ctx)
    probs = rho.probs
    zero = 0 * ctx.Z
    target = rho.total - eps
    tol = ctx.tol

    kept, cum = 0, zero
    for pos in order.permutation:
        if cum + probs[pos] > target + tol:
            break
        cum += probs[pos]
        kept += 1

    new = [zero] * len(probs)
    width = zero
    for pos in order.permutation[:kept]:
        new[pos] = probs[pos]
        if probs[pos] > 0:
            width += ctx.weights[pos]

    fraction = zero
    if kept < len(probs):
        b = order.permutation[kept]
        rest = target - cum
        if rest > 0:
            fraction = rest / probs[b]
            new[b] = rest
            width += fraction * ctx.weights[b]

    smoothed = DiagonalState(rho.spectrum, tuple(new))
    return SmoothingResult(
        kept_count=kept,
        fraction=fraction,
        removed_weight=rho.total - smoothed.total,
        support_mass=width,
        smoothed_state=smoothed,
        ordering=order,
    )


def d0_smooth_fractional(rho: DiagonalState, ctx: ThermalContext, epsilon):
    """``ln(S/Z)`` with ``S`` the fractional support width left by :func:`smooth`."""
    return ctx.log(smooth(rho, ctx, epsilon).support_mass / ctx.Z)


def max_removable_width(rho: DiagonalState, ctx: ThermalContext, epsilon):
    """Largest Boltzmann width removable by zeroing whole levels of mass <= epsilon.

    This is a 0/1 knapsack (mass is the cost, width the value).  It is solved
    exactly by keeping the Pareto frontier of (removed mass, removed width)
    over the support levels.  Returns ``(width, removed_positions)``.
    """
    rho = ctx.check_state(rho)
    eps = _epsilon(rho, ctx, epsilon)
    tol = ctx.tol
    zero = 0 * ctx.Z
    frontier: list[tuple[object, object, tuple[int, ...]]] = [(zero, zero, ())]
    for pos in rho.support:
        p, w = rho.probs[pos], ctx.weights[pos]
        grown = [(m + p, v + w, s + (pos,)) for m, v, s in frontier if m + p <= eps + tol]
        merged = sorted(frontier + grown, key=lambda t: (t[0], -t[1]))
        frontier = []
        for entry in merged:
            if not frontier or entry[1] > frontier[-1][1]:
                frontier.append(entry)
    best = max(frontier, key=lambda t: (t[1], -t[0]))
    return best[1], tuple(sorted(best[2]))


def d0_smooth_integral(rho: DiagonalState, ctx: ThermalContext, epsilon):
    """Smooth D0 over the epsilon-ball, reached by zeroing whole levels.

    Reducing part of a level's probability never shrinks the support, so the
    optimum over the ball removes whole levels: the cheapest set (in
    probability) carrying the most Boltzmann width.
    """
    rho = ctx.check_state(rho)
    _require_support(rho)
    removed, _ = max_removable_width(rho, ctx, epsilon)
    return ctx.log((ctx.support_weight(rho) - removed) / ctx.Z)


def d0_smooth_suffix(rho: DiagonalState, ctx: ThermalContext, epsilon):
    """Whole-level smoothing restricted to a suffix of the beta-order.

    Cheaper than :func:`d0_smooth_integral` but not always optimal: a level
    early in the beta-order can be light enough to drop on its own.
    """
    rho = ctx.check_state(rho)
    _require_support(rho)
    eps = _epsilon(rho, ctx, epsilon)
    perm = [k for k in beta_order(rho, ctx).permutation if rho.probs[k] > 0]
    mass = 0 * ctx.Z
    width = 0 * ctx.Z
    for pos in reversed(perm):
        if mass + rho.probs[pos] > eps + ctx.tol:
            break
        mass += rho.probs[pos]
        width += ctx.weights[pos]
    return ctx.log((ctx.support_weight(rho) - width) / ctx.Z)


def smoothing_report(rho: DiagonalState, ctx: ThermalContext, epsilon) -> dict:
    res = smooth(rho, ctx, epsilon)
    return {
        "l": res.kept_count,
        "f": res.fraction,
        "S": res.support_mass,
        "removed": res.removed_weight,
        "Z": ctx.Z,
    }


__all__ = [
    "SmoothingResult",
    "d0",
    "d0_textbook",
    "smooth",
    "d0_smooth_fractional",
    "d0_smooth_integral",
    "d0_smooth_suffix",
    "max_removable_width",
    "smoothing_report",
]
