"""Beta-ordering, thermo-majorization curves and the Thermal Operations test."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import DiagonalState, ThermalContext
from .errors import NonPhysicalStateError


@dataclass(frozen=True)
class BetaOrdering:
    """Levels sorted by decreasing Gibbs-rescaled weight ``P(E_i) * exp(beta*E_i)``.

    ``permutation`` holds positions in the spectrum's stored (ascending energy)
    order; ``original`` translates them back to the caller's input indices.
    """

    permutation: tuple[int, ...]
    rescaled_weights: tuple
    original: tuple[int, ...]


def _group_ties(keyed: list[tuple[object, int]], rel_tol: float) -> list[int]:
    # float mode: weights within rel_tol count as tied and fall back to position order
    out: list[int] = []
    k = 0
    while k < len(keyed):
        head = keyed[k][0]
        j = k + 1
        while j < len(keyed) and abs(keyed[j][0] - head) <= rel_tol * max(abs(head), 1e-300):
            j += 1
        out.extend(sorted(pos for _, pos in keyed[k:j]))
        k = j
    return out


def beta_order(state: DiagonalState, ctx: ThermalContext) -> BetaOrdering:
    state = ctx.check_state(state)
    rescaled = [p / w for p, w in zip(state.probs, ctx.weights)]
    keyed = sorted(((r, pos) for pos, r in enumerate(rescaled)), key=lambda t: (-t[0], t[1]))
    if ctx.exact:
        perm = [pos for _, pos in keyed]
    else:
        perm = _group_ties(keyed, 1e-12)
    return BetaOrdering(
        permutation=tuple(perm),
        rescaled_weights=tuple(rescaled[k] for k in perm),
        original=tuple(ctx.spectrum.index[k] for k in perm),
    )


@dataclass(frozen=True)
class MajorizationCurve:
    """Piecewise-linear curve through cumulative (Boltzmann width, probability) pairs."""

    breakpoints: tuple[tuple[object, object], ...]

    @property
    def xs(self) -> tuple:
        return tuple(x for x, _ in self.breakpoints)

    @property
    def ys(self) -> tuple:
        return tuple(y for _, y in self.breakpoints)

    @property
    def slopes(self) -> tuple:
        bp = self.breakpoints
        return tuple((y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(bp, bp[1:]))

    def is_concave(self, tol=0) -> bool:
        s = self.slopes
        return all(b <= a + tol for a, b in zip(s, s[1:]))

    def __call__(self, x):
        bp = self.breakpoints
        if x <= bp[0][0]:
            return bp[0][1]
        for (x0, y0), (x1, y1) in zip(bp, bp[1:]):
            if x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return bp[-1][1]


def majorization_curve(state: DiagonalState, ctx: ThermalContext) -> MajorizationCurve:
    state = ctx.check_state(state)
    order = beta_order(state, ctx)
    zero = Fraction(0) if ctx.exact else 0.0
    x, y = zero, zero
    points = [(zero, zero)]
    for k in order.permutation:
        x += ctx.weights[k]
        y += state.probs[k]
        points.append((x, y))
    return MajorizationCurve(tuple(points))


def thermo_majorizes(a: DiagonalState, b: DiagonalState, ctx: ThermalContext) -> bool:
    """Whether ``a`` can be turned into ``b`` by Thermal Operations.

    Both curves are piecewise linear, so comparing them on the union of their
    breakpoint abscissae is exact.
    """
    a = ctx.check_state(a)
    b = ctx.check_state(b)
    if not (a.physical and b.physical):
        raise NonPhysicalStateError("thermo-majorization compares normalized states only")
    ca, cb = majorization_curve(a, ctx), majorization_curve(b, ctx)
    tol = ctx.tol
    return all(ca(x) >= cb(x) - tol for x in sorted(set(ca.xs) | set(cb.xs)))


def staircase_svg(state: DiagonalState, ctx: ThermalContext, width: int = 480, height: int = 320) -> str:
    """Render the beta-ordered staircase as SVG.

    Each level is a rectangle of width ``exp(-beta*E)`` and height
    ``P * exp(beta*E)``, so its area is the level's probability.
    """
    state = ctx.check_state(state)
    order = beta_order(state, ctx)
    top = max(float(r) for r in order.rescaled_weights) or 1.0
    sx = (width - 40) / float(ctx.Z)
    sy = (height - 40) / top
    rects: list[str] = []
    x = 0.0
    for k, r in zip(order.permutation, order.rescaled_weights):
        w = float(ctx.weights[k])
        h = float(r)
        rects.append(
            f'<rect x="{20 + x * sx:.6g}" y="{height - 20 - h * sy:.6g}" '
            f'width="{w * sx:.6g}" height="{h * sy:.6g}" '
            f'fill="#9ecae1" stroke="#08519c"><title>E={ctx.spectrum[k]} '
            f'P={float(state.probs[k]):.6g}</title></rect>'
        )
        x += w
    axis = (
        f'<line x1="20" y1="{height - 20}" x2="{width - 20}" y2="{height - 20}" stroke="black"/>'
        f'<line x1="20" y1="20" x2="20" y2="{height - 20}" stroke="black"/>'
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">' + "".join(rects) + axis + "</svg>\n"
    )


def curve_csv(curve: MajorizationCurve, fmt=str) -> str:
    lines = ["x,y"]
    lines.extend(f"{fmt(x)},{fmt(y)}" for x, y in curve.breakpoints)
    return "\n".join(lines) + "\n"

