from fractions import Fraction as F

from thermoflux.oracle import Instance
from thermoflux.verify import check_instance, run_verification


def test_check_instance_running_example():
    inst = Instance((0, 1, 2), (F(1, 2), F(3, 10), F(1, 5)), 2)
    rep = check_instance(inst, F(1, 10), F(0))
    assert rep["ok"]
    assert rep["oracle"] == {"forward": "9/10", "reverse": "1", "ratio": "9/10"}
    assert rep["closed_form_ratio"] == "9/10"


def test_check_instance_float_mode():
    inst = Instance((0, 3, 1), (F(1, 4), F(1, 4), F(1, 2)), 3)
    rep = check_instance(inst, F(1, 4), F(1, 2), mode="float")
    assert rep["ok"] and isinstance(rep["closed_form_ratio"], float)


def test_sweep_is_reproducible_and_clean():
    a = list(run_verification(30, seed=1))
    b = list(run_verification(30, seed=1))
    assert a == b
    done = [r for r in a if not r.get("refused")]
    assert len(done) == 30 and all(r["ok"] for r in done)


def test_float_sweep():
    done = [r for r in run_verification(30, seed=3, mode="float") if not r.get("refused")]
    assert all(r["ok"] for r in done)
