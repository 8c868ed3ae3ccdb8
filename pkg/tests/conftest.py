import math
from fractions import Fraction as F

import pytest

from thermoflux.core import DiagonalState, make_thermal_context
from thermoflux.exact import ExactLog

LN2 = ExactLog(2)


@pytest.fixture
def ctx3():
    return make_thermal_context([0, 1, 2], LN2)


@pytest.fixture
def rho3(ctx3):
    return DiagonalState(ctx3.spectrum, (F(1, 2), F(3, 10), F(1, 5)))


@pytest.fixture
def fctx3():
    return make_thermal_context([0.0, 1.0, 2.0], math.log(2))


@pytest.fixture
def frho3(fctx3):
    return DiagonalState(fctx3.spectrum, (0.5, 0.3, 0.2))


@pytest.fixture
def ctx2():
    return make_thermal_context([0, 1], LN2)


@pytest.fixture
def ground2(ctx2):
    return DiagonalState(ctx2.spectrum, (F(1), F(0)))
