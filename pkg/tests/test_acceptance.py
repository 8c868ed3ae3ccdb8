"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``pytest -s``
or in the verbose log) before asserting.
"""
import math
import random
import time
from fractions import Fraction as F

import pytest

from thermoflux.core import BathModel, DiagonalState, EnergySpectrum, ThermalContext, make_thermal_context
from thermoflux.divergence import d0, d0_smooth_fractional, d0_smooth_integral, smooth
from thermoflux.errors import ResourceLimitError
from thermoflux.exact import ExactEnergy, ExactLog
from thermoflux.majorization import majorization_curve, thermo_majorizes
from thermoflux.oracle import (
    FiniteModel,
    finite_model,
    max_microstates,
    oracle_forward_reverse,
    oracle_smoothing,
    random_instance,
    saturating_work,
)
from thermoflux.process import (
    build_transition_currents,
    degeneracy_scale,
    deterministic_work,
    epsilon_work_bound,
    fluctuation_ratio,
    forward_distribution,
    reverse_probability,
)

EPSILONS = (F(0), F(1, 10), F(1, 4))
DELTAS = (F(0), F(1, 10), F(1, 2))


def report(name, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}{': ' + detail if detail else ''}")
    return ok


def accepted_instances(seed, count, headroom=1, **kwargs):
    """Random instances whose finite models the oracle accepts, even at ``headroom`` times G."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        inst = random_instance(rng, **kwargs)
        eps, delta = rng.choice(EPSILONS), rng.choice(DELTAS)
        try:
            model = finite_model(inst.state, inst.ctx, epsilon=eps, delta=delta)
            result = oracle_forward_reverse(model, eps, delta)
        except ResourceLimitError:
            continue
        if model.total_microstates * headroom > max_microstates():
            continue
        out.append((inst, eps, delta, model, result))
    return out


def test_criterion_1_deterministic_work():
    start = time.perf_counter()
    rng = random.Random(101)
    checked = failures = 0
    while checked < 100:
        inst = random_instance(rng, n_max=6)
        w = deterministic_work(inst.state, inst.ctx)
        try:
            res = oracle_forward_reverse(finite_model(inst.state, inst.ctx, w))
        except ResourceLimitError:
            continue
        checked += 1
        exponent_zero = d0(inst.state, inst.ctx).exp() / w.factor == 1
        failures += not (res.p_forward == 1 and res.p_reverse == 1 and exponent_zero)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10
    assert report("1 deterministic work", ok, f"{checked} instances, {failures} failures, {elapsed:.2f}s")


def test_criterion_2_fluctuation_identity():
    start = time.perf_counter()
    cases = accepted_instances(202, 100)
    exact_fail = float_fail = 0
    worst = 0.0
    for inst, eps, delta, model, res in cases:
        w = model.w
        exact_fail += fluctuation_ratio(inst.state, inst.ctx, w, eps, delta) != res.ratio
        fctx = ThermalContext(inst.ctx.spectrum, math.log(inst.base))
        closed = fluctuation_ratio(inst.state.as_float(), fctx, float(w), float(eps), float(delta))
        err = abs(closed - float(res.ratio)) / float(res.ratio)
        worst = max(worst, err)
        float_fail += err > 1e-12
    elapsed = time.perf_counter() - start
    combos = {(e, d) for _, e, d, _, _ in cases}
    ok = exact_fail == 0 and float_fail == 0 and elapsed < 60 and len(combos) == 9
    assert report(
        "2 fluctuation identity",
        ok,
        f"{len(cases)} instances, {len(combos)} (eps, delta) pairs, exact failures {exact_fail}, "
        f"float worst rel err {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_3_work_bound_saturation():
    rng = random.Random(303)
    failures = 0
    for _ in range(200):
        inst = random_instance(rng)
        ctx, rho = inst.ctx, inst.state
        for eps in EPSILONS:
            bound = epsilon_work_bound(rho, ctx, eps)
            at = reverse_probability(rho, ctx, bound, eps, 0)
            # one energy unit lower multiplies the Boltzmann factor by the base
            below = reverse_probability(rho, ctx, ExactEnergy(bound.factor * ctx.base, ctx.base), eps, 0)
            failures += not (at.value == 1 and at.feasible and below.value > 1 and not below.feasible)
        failures += epsilon_work_bound(rho, ctx, 0) != deterministic_work(rho, ctx)
        failures += epsilon_work_bound(rho, ctx, 0) != ctx.energy_from_factor(d0(rho, ctx).exp())
    ctx = make_thermal_context([0, 1, 2], ExactLog(2))
    rho = DiagonalState(ctx.spectrum, (F(1, 2), F(3, 10), F(1, 5)))
    failures += reverse_probability(rho, ctx, epsilon_work_bound(rho, ctx, F(1, 10)), F(1, 10), 0).value != 1
    assert report("3 work bound saturation", failures == 0, f"{failures} failures over 200 instances")


def test_criterion_4_smoothing_optimality():
    rng = random.Random(404)
    failures = 0
    sizes = set()
    for _ in range(250):
        inst = random_instance(rng, n_max=12)
        sizes.add(len(inst.energies))
        eps = rng.choice((F(0), F(1, 10), F(1, 4), F(1, 2), F(3, 4)))
        failures += d0_smooth_integral(inst.state, inst.ctx, eps) != oracle_smoothing(inst.state, inst.ctx, eps)
    ok = failures == 0 and max(sizes) == 12
    assert report("4 smoothing optimality", ok, f"250 cases, sizes up to {max(sizes)}, {failures} mismatches")


@pytest.mark.parametrize("delta", [F(1, 10), F(1, 2), F(3, 4)])
def test_criterion_5_thermal_work_content(delta):
    failures = 0
    spectra = [[0], [0, 1], [0, 1, 2], [0, 0, 3, 5], [1, 2, 2, 4, 7]]
    for energies in spectra:
        for base in (2, 3, F(3, 2)):
            ctx = make_thermal_context(energies, ExactLog(base))
            failures += d0_smooth_fractional(ctx.gibbs, ctx, delta) != ExactLog(1 - delta)
    assert report(f"5 thermal work content delta={delta}", failures == 0, f"{failures} mismatches")


def test_criterion_6_structural_invariants():
    rng = random.Random(606)
    bad_curves = bad_gibbs = 0
    for _ in range(1000):
        inst = random_instance(rng)
        curve = majorization_curve(inst.state, inst.ctx)
        bad_curves += not (
            curve.is_concave() and curve.breakpoints[0] == (0, 0) and curve.breakpoints[-1] == (inst.ctx.Z, 1)
        )
        bad_gibbs += not thermo_majorizes(inst.state, inst.ctx.gibbs, inst.ctx)

    bad_marginals = bad_scaling = 0
    for inst, eps, delta, model, res in accepted_instances(607, 60, headroom=10):
        ctx = inst.ctx
        source = smooth(inst.state, ctx, eps).smoothed_state
        w = deterministic_work(source, ctx)
        bath = BathModel(ctx.beta, degeneracy_scale(source, ctx, BathModel(ctx.beta, 1), w))
        cur = build_transition_currents(source, ctx, bath, w)
        bad_marginals += not cur.satisfies_marginals()
        dist, final = forward_distribution(cur, source, bath)
        for k in (2, 3, 10):
            scaled_bath = bath.scaled(k)
            cur_k = build_transition_currents(source, ctx, scaled_bath, w)
            bad_marginals += not cur_k.satisfies_marginals()
            bad_scaling += forward_distribution(cur_k, source, scaled_bath) != (dist, final)
            again = oracle_forward_reverse(FiniteModel(model.rho, ctx, model.bath.scaled(k), model.w), eps, delta)
            bad_scaling += again.ratio != res.ratio
    ok = not (bad_curves or bad_gibbs or bad_marginals or bad_scaling)
    assert report(
        "6 structural invariants",
        ok,
        f"curves {bad_curves}, gibbs {bad_gibbs}, marginals {bad_marginals}, G-scaling {bad_scaling} failures",
    )


def test_criterion_7_worked_examples():
    checks = {}
    ln2 = ExactLog(2)

    ctx2 = make_thermal_context([0, 1], ln2)
    ground = DiagonalState(ctx2.spectrum, (F(1), F(0)))
    w = deterministic_work(ground, ctx2)
    bath = BathModel(ln2, 12)
    cur = build_transition_currents(ground, ctx2, bath, w)
    dist, final = forward_distribution(cur, ground, bath)
    checks["two-level k"] = cur.counts == ((8, 4),)
    checks["two-level P(w)"] = dist.probability(w) == 1
    checks["two-level final Gibbs"] = final.probs == (F(2, 3), F(1, 3))

    ctx3 = make_thermal_context([0, 1, 2], ln2)
    rho = DiagonalState(ctx3.spectrum, (F(1, 2), F(3, 10), F(1, 5)))
    eps = F(1, 10)
    bound = epsilon_work_bound(rho, ctx3, eps)
    checks["three-level S"] = smooth(rho, ctx3, eps).support_mass == F(31, 20)
    checks["three-level bound"] = abs(float(bound) - math.log(63 / 62) / math.log(2)) <= 1e-12 and round(float(bound), 4) == 0.0231
    checks["three-level ratio"] = fluctuation_ratio(rho, ctx3, bound, eps, 0) == F(9, 10)
    res = oracle_forward_reverse(finite_model(rho, ctx3, bound, epsilon=eps), eps, 0)
    checks["three-level oracle"] = (res.p_forward, res.p_reverse, res.ratio) == (F(9, 10), 1, F(9, 10))
    checks["saturating w"] = saturating_work(rho, ctx3, eps) == bound

    fctx = ThermalContext(EnergySpectrum([0.0, 1.0, 2.0]), math.log(2))
    frho = DiagonalState(fctx.spectrum, (0.5, 0.3, 0.2))
    fbound = epsilon_work_bound(frho, fctx, 0.1)
    checks["float S"] = abs(smooth(frho, fctx, 0.1).support_mass - 1.55) <= 1e-12
    checks["float bound"] = abs(fbound - float(bound)) <= 1e-12
    checks["float ratio"] = abs(fluctuation_ratio(frho, fctx, fbound, 0.1, 0) - 0.9) <= 1e-12

    failed = [k for k, v in checks.items() if not v]
    assert report("7 worked examples", not failed, "all match" if not failed else f"failed: {failed}")
