import random
from fractions import Fraction as F

import pytest

from thermoflux.core import BathModel, DiagonalState, make_thermal_context
from thermoflux.errors import InfeasibleError, ResourceLimitError, ThermofluxError
from thermoflux.exact import ExactEnergy, ExactLog
from thermoflux.oracle import (
    ENV_MAX_MICROSTATES,
    FiniteModel,
    finite_model,
    oracle_forward_reverse,
    oracle_smoothing,
    random_instance,
    random_instances,
    saturating_work,
)
from thermoflux.process import epsilon_work_bound

LN2 = ExactLog(2)
LOG2_3_2 = ExactEnergy(F(2, 3), 2)


class TestForwardReverse:
    def test_deterministic_two_level(self, ctx2, ground2):
        model = FiniteModel(ground2, ctx2, BathModel(LN2, 12), LOG2_3_2)
        assert model.initial_shells == (12, 6)
        assert model.final_shells == (8, 4)
        res = oracle_forward_reverse(model)
        assert (res.p_forward, res.p_reverse, res.ratio) == (1, 1, 1)
        assert res.forward_counts == {(0, 0): 8, (0, 1): 4}

    def test_running_example(self, rho3, ctx3):
        w = epsilon_work_bound(rho3, ctx3, F(1, 10))
        model = finite_model(rho3, ctx3, w, epsilon=F(1, 10))
        assert model.bath.G == 1260
        res = oracle_forward_reverse(model, F(1, 10), 0)
        assert (res.p_forward, res.p_reverse, res.ratio) == (F(9, 10), 1, F(9, 10))

    def test_delta_halves_reverse(self, rho3, ctx3):
        w = epsilon_work_bound(rho3, ctx3, F(1, 10))
        model = finite_model(rho3, ctx3, w, epsilon=F(1, 10), delta=F(1, 2))
        res = oracle_forward_reverse(model, F(1, 10), F(1, 2))
        assert res.p_reverse == F(1, 2)
        assert res.ratio == F(9, 5)

    def test_saturating_work_matches_bound(self):
        rng = random.Random(6)
        for _ in range(100):
            inst = random_instance(rng)
            for eps in (F(0), F(1, 10), F(1, 4)):
                assert saturating_work(inst.state, inst.ctx, eps) == epsilon_work_bound(inst.state, inst.ctx, eps)

    def test_g_scaling_leaves_probabilities(self, ctx2, ground2):
        base = oracle_forward_reverse(FiniteModel(ground2, ctx2, BathModel(LN2, 12), LOG2_3_2))
        for k in (2, 3, 10):
            again = oracle_forward_reverse(FiniteModel(ground2, ctx2, BathModel(LN2, 12 * k), LOG2_3_2))
            assert (again.p_forward, again.p_reverse) == (base.p_forward, base.p_reverse)

    def test_non_saturating_work_is_infeasible(self, ctx2, ground2):
        model = FiniteModel(ground2, ctx2, BathModel(LN2, 12), 0)
        with pytest.raises(InfeasibleError):
            oracle_forward_reverse(model)

    def test_non_integral_shells_rejected(self, ctx2, ground2):
        with pytest.raises(InfeasibleError):
            FiniteModel(ground2, ctx2, BathModel(LN2, 4), LOG2_3_2)

    def test_float_context_rejected(self, fctx3, frho3):
        with pytest.raises(ThermofluxError):
            finite_model(frho3, fctx3, 0.0)


class TestLimits:
    def test_microstate_cap_from_environment(self, rho3, ctx3, monkeypatch):
        w = epsilon_work_bound(rho3, ctx3, F(1, 10))
        model = finite_model(rho3, ctx3, w, epsilon=F(1, 10))
        monkeypatch.setenv(ENV_MAX_MICROSTATES, str(model.total_microstates - 1))
        with pytest.raises(ResourceLimitError, match=ENV_MAX_MICROSTATES):
            oracle_forward_reverse(model, F(1, 10), 0)
        monkeypatch.setenv(ENV_MAX_MICROSTATES, str(model.total_microstates))
        assert oracle_forward_reverse(model, F(1, 10), 0).ratio == F(9, 10)

    def test_bad_cap_value(self, monkeypatch, ctx2, ground2):
        monkeypatch.setenv(ENV_MAX_MICROSTATES, "lots")
        with pytest.raises(ThermofluxError):
            oracle_forward_reverse(FiniteModel(ground2, ctx2, BathModel(LN2, 12), LOG2_3_2))

    def test_level_cap(self):
        ctx = make_thermal_context([0] * 13, LN2)
        rho = DiagonalState(ctx.spectrum, (F(1, 13),) * 13)
        with pytest.raises(ResourceLimitError):
            oracle_smoothing(rho, ctx, 0)
        with pytest.raises(ResourceLimitError):
            oracle_forward_reverse(finite_model(rho, ctx))


class TestSmoothing:
    @pytest.mark.parametrize("eps,expected", [(F(0), ExactLog(1)), (F(1, 10), ExactLog(1)), (F(1, 2), ExactLog(F(3, 7)))])
    def test_examples(self, rho3, ctx3, eps, expected):
        assert oracle_smoothing(rho3, ctx3, eps) == expected

    def test_partial_support(self, ctx2, ground2):
        assert oracle_smoothing(ground2, ctx2, 0) == ExactLog(F(2, 3))


def test_random_instances_are_reproducible():
    a = list(random_instances(5, 20))
    b = list(random_instances(5, 20))
    assert a == b
    for inst in a:
        assert inst.state.physical
        assert 1 <= len(inst.energies) <= 6
