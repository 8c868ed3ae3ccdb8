"""Sweeps that pit the closed forms against the exhaustive oracle."""
from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Iterator

from .core import ThermalContext
from .divergence import d0, d0_smooth_integral
from .errors import ResourceLimitError
from .exact import ExactEnergy, format_rational
from .oracle import (
    Instance,
    finite_model,
    oracle_forward_reverse,
    oracle_smoothing,
    random_instance,
    saturating_work,
)
from .process import deterministic_work, epsilon_work_bound, fluctuation_ratio, reverse_probability

EPSILONS = (Fraction(0), Fraction(1, 10), Fraction(1, 4))
DELTAS = (Fraction(0), Fraction(1, 10), Fraction(1, 2))
FLOAT_REL_TOL = 1e-12
G_FACTORS = (2, 3, 10)


def _rel_close(a: float, b: float, tol: float = FLOAT_REL_TOL) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


def _float_ctx(inst: Instance) -> ThermalContext:
    return ThermalContext(inst.ctx.spectrum, math.log(inst.base))


def check_instance(inst: Instance, epsilon: Fraction, delta: Fraction, mode: str = "exact") -> dict:
    """Run every identity on one instance; returns a JSON-ready report."""
    ctx, rho = inst.ctx, inst.state
    checks: dict[str, bool] = {}

    w0 = deterministic_work(rho, ctx)
    det = oracle_forward_reverse(finite_model(rho, ctx, w0), 0, 0)
    checks["deterministic_forward_is_one"] = det.p_forward == 1
    checks["deterministic_reverse_is_one"] = det.p_reverse == 1
    checks["deterministic_exponent_is_zero"] = d0(rho, ctx).exp() / w0.factor == 1

    w_sat = saturating_work(rho, ctx, epsilon)
    bound = epsilon_work_bound(rho, ctx, epsilon)
    checks["saturating_work_is_bound"] = w_sat == bound
    model = finite_model(rho, ctx, w_sat, epsilon=epsilon, delta=delta)
    res = oracle_forward_reverse(model, epsilon, delta)
    for k in G_FACTORS:
        scaled = type(model)(model.rho, model.ctx, model.bath.scaled(k), model.w)
        again = oracle_forward_reverse(scaled, epsilon, delta)
        checks[f"g_invariance_x{k}"] = (again.p_forward, again.p_reverse) == (res.p_forward, res.p_reverse)

    rev = reverse_probability(rho, ctx, bound, epsilon, 0)
    lower = ExactEnergy(bound.factor * ctx.base, ctx.base)
    rev_lower = reverse_probability(rho, ctx, lower, epsilon, 0)
    checks["bound_saturates"] = rev.value == 1 and rev.feasible
    checks["bound_step_below_infeasible"] = rev_lower.value > 1 and not rev_lower.feasible

    truth = oracle_smoothing(rho, ctx, epsilon)
    if mode == "exact":
        closed = fluctuation_ratio(rho, ctx, w_sat, epsilon, delta)
        checks["ratio_identity"] = closed == res.ratio
        checks["smoothing_optimal"] = d0_smooth_integral(rho, ctx, epsilon) == truth
        closed_out = format_rational(closed)
    else:
        fctx, frho = _float_ctx(inst), rho.as_float()
        closed = fluctuation_ratio(frho, fctx, float(w_sat), float(epsilon), float(delta))
        checks["ratio_identity"] = _rel_close(closed, float(res.ratio))
        checks["smoothing_optimal"] = abs(d0_smooth_integral(frho, fctx, float(epsilon)) - float(truth)) <= 1e-12
        closed_out = float(f"{closed:.15g}")

    return {
        "spec": {
            "beta": f"ln({inst.base})",
            "energies": list(inst.energies),
            "probabilities": [format_rational(p) for p in inst.probs],
            "epsilon": format_rational(epsilon),
            "delta": format_rational(delta),
            "mode": mode,
        },
        "G": format_rational(model.bath.G),
        "microstates": model.total_microstates,
        "oracle": {
            "forward": format_rational(res.p_forward),
            "reverse": format_rational(res.p_reverse),
            "ratio": format_rational(res.ratio),
        },
        "closed_form_ratio": closed_out,
        "checks": checks,
        "ok": all(checks.values()),
    }


def run_verification(instances: int, seed: int, mode: str = "exact", max_attempts: int | None = None) -> Iterator[dict]:
    """Yield reports for ``instances`` random instances the oracle accepts.

    Instances over the oracle's size caps are skipped and reported with
    ``"refused": true``; they do not count towards ``instances``.
    """
    rng = random.Random(seed)
    done = attempts = 0
    limit = max_attempts if max_attempts is not None else 20 * instances + 100
    while done < instances and attempts < limit:
        attempts += 1
        inst = random_instance(rng)
        eps = rng.choice(EPSILONS)
        delta = rng.choice(DELTAS)
        try:
            report = check_instance(inst, eps, delta, mode)
        except ResourceLimitError as exc:
            yield {"refused": True, "reason": str(exc), "spec": {"energies": list(inst.energies)}}
            continue
        report["instance"] = done
        done += 1
        yield report
