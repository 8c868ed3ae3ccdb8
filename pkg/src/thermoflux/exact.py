"""Exact representations of logarithmic quantities.

Exact mode works with inverse temperatures of the form ``beta = ln(r)`` for a
rational ``r > 1``.  Boltzmann factors ``exp(-beta*E) = r**(-E)`` are then
rational for integer energies, and every quantity the library produces is
either a rational number or the logarithm of one.  The two classes here carry
such logarithms without ever rounding them.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_LN_RE = re.compile(r"^\s*ln\s*\(\s*([^)]+?)\s*\)\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, an integer, a decimal string, or a number into a Fraction.

    Floats go through their shortest decimal representation, so ``0.3`` maps
    to ``3/10`` rather than to the binary64 value.
    """
    if isinstance(text, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        if not math.isfinite(text):
            raise ValueError(f"non-finite value {text!r}")
        return Fraction(repr(text))
    if isinstance(text, str):
        m = _RATIONAL_RE.match(text)
        if m:
            num, den = m.groups()
            if den is not None and int(den) == 0:
                raise ZeroDivisionError(f"zero denominator in {text!r}")
            return Fraction(int(num), int(den) if den else 1)
        try:
            return Fraction(text.strip())
        except ValueError:
            raise ValueError(f"not a rational number: {text!r}") from None
    raise TypeError(f"cannot interpret {type(text).__name__} as a rational")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_rational(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


@total_ordering
@dataclass(frozen=True)
class ExactLog:
    """The natural logarithm of a positive rational, ``ln(argument)``.

    Sums and differences stay exact (they multiply/divide the arguments);
    ``float()`` gives the binary64 value and ``exp()`` returns the argument.
    """

    argument: Fraction

    def __post_init__(self):
        arg = parse_rational(self.argument)
        if arg <= 0:
            raise ValueError(f"logarithm of non-positive value {arg}")
        object.__setattr__(self, "argument", arg)

    def exp(self) -> Fraction:
        return self.argument

    def __float__(self) -> float:
        return math.log(self.argument.numerator) - math.log(self.argument.denominator)

    def __add__(self, other):
        if isinstance(other, ExactLog):
            return ExactLog(self.argument * other.argument)
        return float(self) + other

    __radd__ = __add__

    def __neg__(self):
        return ExactLog(1 / self.argument)

    def __sub__(self, other):
        if isinstance(other, ExactLog):
            return ExactLog(self.argument / other.argument)
        return float(self) - other

    def __rsub__(self, other):
        return other - float(self)

    def __mul__(self, k):
        if isinstance(k, int) and not isinstance(k, bool):
            return ExactLog(self.argument**k)
        return float(self) * k

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, ExactLog):
            return self.argument == other.argument
        if is_rational(other) and other == 0:
            return self.argument == 1
        return NotImplemented

    def __hash__(self):
        return hash(("ln", self.argument))

    def __lt__(self, other):
        if isinstance(other, ExactLog):
            return self.argument < other.argument
        if is_rational(other) and other == 0:
            return self.argument < 1
        return float(self) < other

    def __str__(self) -> str:
        if self.argument == 1:
            return "0"
        return f"ln({format_rational(self.argument)})"

    def __repr__(self) -> str:
        return f"ExactLog({format_rational(self.argument)!r})"

    @classmethod
    def parse(cls, text: str) -> "ExactLog":
        m = _LN_RE.match(text)
        if not m:
            raise ValueError(f"expected 'ln(p/q)', got {text!r}")
        return cls(parse_rational(m.group(1)))


@total_ordering
@dataclass(frozen=True)
class ExactEnergy:
    """An energy ``E`` stored through its Boltzmann factor ``r**(-E)``.

    ``base`` is ``r = exp(beta)``.  Integer energies have rational factors, and
    so do work values such as ``log_2(3/2)`` that arise from ratios of
    partition sums.  Larger energies have smaller factors.
    """

    factor: Fraction
    base: Fraction

    def __post_init__(self):
        factor = parse_rational(self.factor)
        base = parse_rational(self.base)
        if factor <= 0:
            raise ValueError("Boltzmann factor must be positive")
        if base <= 1:
            raise ValueError("base exp(beta) must exceed 1")
        object.__setattr__(self, "factor", factor)
        object.__setattr__(self, "base", base)

    @classmethod
    def from_value(cls, energy, base) -> "ExactEnergy":
        """Wrap an integer-valued energy; non-integers have irrational factors."""
        if isinstance(energy, ExactEnergy):
            if energy.base != Fraction(base):
                raise ValueError("energy expressed in a different base")
            return energy
        e = parse_rational(energy)
        if e.denominator != 1:
            raise ValueError(
                f"energy {e} has an irrational Boltzmann factor in exact mode; "
                "use an integer or give the factor explicitly"
            )
        base = Fraction(base)
        return cls(base ** (-e.numerator), base)

    @property
    def beta(self) -> float:
        return float(ExactLog(self.base))

    def __float__(self) -> float:
        return 0.0 - float(ExactLog(self.factor)) / self.beta

    def _coerce(self, other) -> "ExactEnergy":
        if isinstance(other, ExactEnergy):
            if other.base != self.base:
                raise ValueError("energies expressed in different bases")
            return other
        return ExactEnergy.from_value(other, self.base)

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        return ExactEnergy(self.factor * self._coerce(other).factor, self.base)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        return ExactEnergy(self.factor / self._coerce(other).factor, self.base)

    def __rsub__(self, other):
        if isinstance(other, float):
            return other - float(self)
        return self._coerce(other) - self

    def __neg__(self):
        return ExactEnergy(1 / self.factor, self.base)

    def __eq__(self, other):
        if isinstance(other, ExactEnergy):
            return self.factor == other.factor and self.base == other.base
        if is_rational(other):
            try:
                return self == self._coerce(other)
            except ValueError:
                return False
        return NotImplemented

    def __hash__(self):
        return hash(("E", self.factor, self.base))

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        return self.factor > self._coerce(other).factor

    def as_integer(self) -> int | None:
        """The energy as an int when the factor is an integral power of the base."""
        guess = round(float(self))
        if self.base ** (-guess) == self.factor:
            return guess
        return None

    def __str__(self) -> str:
        k = self.as_integer()
        if k is not None:
            return str(k)
        return f"ln({format_rational(1 / self.factor)})/ln({format_rational(self.base)})"

    def __repr__(self) -> str:
        return f"ExactEnergy(factor={format_rational(self.factor)!r}, base={format_rational(self.base)!r})"
