"""Arbitrary-precision scalars shared by every other module.

Real and complex values are backed by mpmath's ``mpf``/``mpc``, whose
exponents are unbounded Python integers, so quantities such as
``exp(-5000)`` or ``10000!`` never overflow or underflow.  ``HPReal`` and
``HPComplex`` are small immutable wrappers that carry their working
precision with the value and refuse to mix precisions silently.  Exact
rationals are ``fractions.Fraction``.

Heavy inner loops in the other modules work on raw ``mpf``/``mpc`` values
under :func:`workprec`; the wrappers are the public currency at API
boundaries and in the precision-escalation helper.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import mpmath
from mpmath import mp, mpc, mpf
from mpmath.libmp import from_rational, round_nearest

__all__ = [
    "BigRational",
    "DEFAULT_PRECISION",
    "DomainError",
    "HPComplex",
    "HPReal",
    "NumericalFailure",
    "PrecisionMismatch",
    "StableResult",
    "default_precision",
    "rational_op",
    "real_op",
    "stable_evaluate",
    "workprec",
]

BigRational = Fraction

DEFAULT_PRECISION = 192
PRECISION_ENV_VAR = "RANDDIGRAPH_PRECISION"

workprec = mp.workprec


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PrecisionMismatch(ValueError):
    """Two high-precision operands carry different working precisions."""


class NumericalFailure(RuntimeError):
    """A numerical procedure could not reach its requested accuracy.

    ``partial`` holds the best value obtained and ``achieved`` an estimate
    of the error that was actually reached (either may be ``None``).
    """

    def __init__(self, message: str, partial=None, achieved=None):
        super().__init__(message)
        self.partial = partial
        self.achieved = achieved


def default_precision() -> int:
    """Working precision in bits, honouring ``RANDDIGRAPH_PRECISION``."""
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ValueError(f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}") from exc
    if bits < 64:
        raise ValueError(f"{PRECISION_ENV_VAR} must be at least 64, got {bits}")
    return bits


@dataclass(frozen=True)
class HPReal:
    """Binary floating point number ``mantissa * 2**exponent``.

    The value is always rounded to ``precision_bits`` significant bits
    with round-to-nearest-even.  Zero is ``mantissa == 0, exponent == 0``.
    """

    mantissa: int
    exponent: int
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits < 2:
            raise ValueError("precision_bits must be at least 2")
        if self.mantissa.bit_length() > self.precision_bits:
            raise ValueError("mantissa wider than precision_bits")

    @classmethod
    def from_value(cls, x, precision_bits: int | None = None) -> "HPReal":
        """Round ``x`` (int, float, str, Fraction or mpf) to a new value."""
        bits = precision_bits or default_precision()
        with workprec(bits):
            if isinstance(x, Fraction):
                # one correctly rounded step (numerator / denominator would round twice)
                v = mpf(from_rational(x.numerator, x.denominator, bits, round_nearest))
            else:
                v = mpf(x)
        return cls._from_mpf(v, bits)

    @classmethod
    def _from_mpf(cls, v: mpf, bits: int) -> "HPReal":
        if not mpmath.isfinite(v):
            raise DomainError(f"non-finite value {v}")
        with workprec(bits):
            v = +v
        sign, man, exp, _ = v._mpf_
        man = int(man)
        if man == 0:
            return cls(0, 0, bits)
        return cls(-man if sign else man, int(exp), bits)

    def to_mpf(self) -> mpf:
        """Exact ``mpf`` image (no rounding happens)."""
        with workprec(max(self.precision_bits, 2)):
            return mpmath.ldexp(mpf(self.mantissa), self.exponent)

    def __float__(self) -> float:
        return float(self.to_mpf())

    def __str__(self) -> str:
        digits = max(1, int(self.precision_bits * math.log10(2)))
        return mpmath.nstr(self.to_mpf(), digits)

    def log10_abs(self) -> float:
        """Decimal logarithm of ``|self|`` without materialising a float."""
        if self.mantissa == 0:
            return -math.inf
        return (math.log2(abs(self.mantissa)) + self.exponent) * math.log10(2)

    def __add__(self, other):
        return real_op("add", self, other)

    def __sub__(self, other):
        return real_op("sub", self, other)

    def __mul__(self, other):
        return real_op("mul", self, other)

    def __truediv__(self, other):
        return real_op("div", self, other)

    def __pow__(self, other):
        return real_op("pow", self, other)

    def __neg__(self):
        return HPReal(-self.mantissa, self.exponent, self.precision_bits)


@dataclass(frozen=True)
class HPComplex:
    """Complex number with two ``HPReal`` parts of equal precision."""

    re: HPReal
    im: HPReal

    def __post_init__(self):
        if self.re.precision_bits != self.im.precision_bits:
            raise PrecisionMismatch("real and imaginary parts differ in precision")

    @property
    def precision_bits(self) -> int:
        return self.re.precision_bits

    @classmethod
    def from_value(cls, z, precision_bits: int | None = None) -> "HPComplex":
        bits = precision_bits or default_precision()
        with workprec(bits):
            z = mpc(z)
        return cls(HPReal._from_mpf(z.real, bits), HPReal._from_mpf(z.imag, bits))

    def to_mpc(self) -> mpc:
        with workprec(self.precision_bits):
            return mpc(self.re.to_mpf(), self.im.to_mpf())

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


_UNARY = {"exp", "log", "sqrt"}
_BINARY = {"add", "sub", "mul", "div", "pow"}


def real_op(name: str, a: HPReal, b: HPReal | None = None) -> HPReal:
    """Apply ``add|sub|mul|div|exp|log|sqrt|pow`` at the operands' precision.

    The result is correctly rounded to ``a.precision_bits`` (mpmath rounds
    every basic operation to nearest).  Mixing precisions raises
    :class:`PrecisionMismatch`; leaving the domain raises
    :class:`DomainError`.
    """
    bits = a.precision_bits
    if name in _BINARY:
        if b is None:
            raise TypeError(f"{name} needs two operands")
        if b.precision_bits != bits:
            raise PrecisionMismatch(
                f"{name}: precision {bits} vs {b.precision_bits}; convert explicitly"
            )
    elif name not in _UNARY:
        raise ValueError(f"unknown operation {name!r}")
    x = a.to_mpf()
    y = b.to_mpf() if b is not None else None
    if name == "div" and y == 0:
        raise DomainError("division by zero")
    if name == "log" and x <= 0:
        raise DomainError("log of a non-positive number")
    if name == "sqrt" and x < 0:
        raise DomainError("sqrt of a negative number")
    if name == "pow" and x < 0 and y != int(y):
        raise DomainError("non-integer power of a negative number")
    if name == "pow" and x == 0 and y < 0:
        raise DomainError("negative power of zero")
    with workprec(bits):
        if name == "add":
            v = x + y
        elif name == "sub":
            v = x - y
        elif name == "mul":
            v = x * y
        elif name == "div":
            v = x / y
        elif name == "pow":
            v = mpmath.power(x, y)
        elif name == "exp":
            v = mpmath.exp(x)
        elif name == "log":
            v = mpmath.log(x)
        else:
            v = mpmath.sqrt(x)
    return HPReal._from_mpf(v, bits)


def rational_op(name: str, a: Fraction, b: Fraction) -> Fraction:
    """Exact ``add|sub|mul|div`` on reduced fractions."""
    if name == "add":
        return a + b
    if name == "sub":
        return a - b
    if name == "mul":
        return a * b
    if name == "div":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    raise ValueError(f"unknown operation {name!r}")


Number = Union[mpf, mpc]


@dataclass(frozen=True)
class StableResult:
    """Value certified by the precision-doubling protocol.

    ``digits`` is the number of significant decimal digits on which the
    last two runs agreed; ``bits`` is the precision of the final run.
    """

    value: Number
    digits: int
    bits: int

    def __float__(self) -> float:
        return float(mpmath.re(self.value))


def _agreement_digits(u: Number, v: Number) -> int:
    diff = abs(u - v)
    scale = max(abs(u), abs(v))
    if scale == 0 or diff == 0:
        return 10**6
    return max(0, int(math.floor(-float(mpmath.log10(diff / scale)))))


def stable_evaluate(
    fn: Callable[[int], Number],
    digits: int,
    start_bits: int | None = None,
    max_bits: int = 1 << 17,
) -> StableResult:
    """Evaluate ``fn(bits)`` at growing precision until two runs agree.

    Successive precisions grow by a factor of 1.5.  The result is the
    value of the higher-precision run once it matches its predecessor to
    ``digits`` significant decimal digits (relative).  When the value is
    exactly zero at two precisions it is accepted as zero.
    """
    bits = max(64, start_bits or default_precision())
    prev = fn(bits)
    while True:
        nxt_bits = int(bits * 1.5) + 16
        if nxt_bits > max_bits:
            raise NumericalFailure(
                f"no agreement to {digits} digits below {max_bits} bits",
                partial=prev,
            )
        cur = fn(nxt_bits)
        agreed = _agreement_digits(prev, cur)
        if agreed >= digits:
            return StableResult(cur, min(agreed, int(nxt_bits * math.log10(2))), nxt_bits)
        prev, bits = cur, nxt_bits
