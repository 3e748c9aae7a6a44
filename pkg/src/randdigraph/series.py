"""Truncated formal power series and the exponential Hadamard product.

Coefficients are always *ordinary* coefficients: ``coeffs[n]`` is the
coefficient of ``z**n``.  For an exponential generating function
``sum a_n z^n / n!`` the stored value is ``a_n / n!``.  The exponential
Hadamard product therefore re-inserts one factorial:
``c_n = a_n * b_n * n!``.

Three coefficient rings are supported:

``rational``
    ``fractions.Fraction`` coefficients, exact.
``hp_real`` / ``hp_complex``
    ``mpmath`` ``mpf`` / ``mpc`` coefficients at a fixed precision that
    travels with the series; every operation runs at that precision.

Multiplication and division are schoolbook O(N^2) but switch to
O(N * nnz) loops when one operand is sparse (polynomials such as
``1 - w z`` or ``C_k(wz)``), which is what keeps the deformed exponential
evaluations linear in the truncation order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath
from mpmath import mpc, mpf

from .scalar_core import DomainError, NumericalFailure, default_precision, workprec

__all__ = [
    "BivariateSeries",
    "RING_COMPLEX",
    "RING_RATIONAL",
    "RING_REAL",
    "RingMismatch",
    "SingularSeries",
    "TruncatedSeries",
    "hadamard_exp",
    "tree_eval",
    "tree_series",
]

RING_RATIONAL = "rational"
RING_REAL = "hp_real"
RING_COMPLEX = "hp_complex"
_RINGS = (RING_RATIONAL, RING_REAL, RING_COMPLEX)


class SingularSeries(ArithmeticError):
    """Reciprocal or logarithm of a series with a vanishing constant term."""


class RingMismatch(TypeError):
    """Operands live in different coefficient rings or precisions."""


def _convert(x, ring: str):
    if ring == RING_RATIONAL:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        raise RingMismatch(f"cannot put {type(x).__name__} into the rational ring")
    if ring == RING_REAL:
        if isinstance(x, Fraction):
            return mpf(x.numerator) / x.denominator
        v = mpmath.mpmathify(x)
        if isinstance(v, mpc):
            if v.imag != 0:
                raise RingMismatch("complex value in the hp_real ring")
            return v.real
        return v
    if isinstance(x, Fraction):
        return mpc(mpf(x.numerator) / x.denominator)
    return mpc(x)


def _zero(ring: str):
    if ring == RING_RATIONAL:
        return Fraction(0)
    return mpf(0) if ring == RING_REAL else mpc(0)


def _dot(ring: str, a: Sequence, b: Sequence):
    """Sum of ``a[i] * b[i]``; exact or with a single final rounding."""
    if ring == RING_RATIONAL:
        return sum((x * y for x, y in zip(a, b)), Fraction(0))
    if not a:
        return _zero(ring)
    return mpmath.fdot(a, b)


class TruncatedSeries:
    """Power series ``sum_{n<=N} c_n z^n`` over a tagged ring.

    Instances are treated as immutable: every operation returns a new
    series truncated to the smaller of the operand orders.
    """

    __slots__ = ("coeffs", "ring", "prec")

    def __init__(self, coeffs: Iterable, ring: str = RING_RATIONAL, prec: int | None = None):
        if ring not in _RINGS:
            raise ValueError(f"unknown ring {ring!r}")
        self.ring = ring
        self.prec = None if ring == RING_RATIONAL else (prec or default_precision())
        if self.prec is None:
            self.coeffs = [_convert(c, ring) for c in coeffs]
        else:
            with workprec(self.prec):
                self.coeffs = [+_convert(c, ring) for c in coeffs]
        if not self.coeffs:
            raise ValueError("a truncated series needs at least one coefficient")

    # -- construction -----------------------------------------------------
    @classmethod
    def _raw(cls, coeffs: list, ring: str, prec: int | None) -> "TruncatedSeries":
        s = cls.__new__(cls)
        s.coeffs = coeffs
        s.ring = ring
        s.prec = prec
        return s

    @classmethod
    def from_function(
        cls, f: Callable[[int], object], order: int, ring: str = RING_RATIONAL, prec: int | None = None
    ) -> "TruncatedSeries":
        """Series with ``c_n = f(n)`` for ``0 <= n <= order``."""
        if ring == RING_RATIONAL:
            return cls([f(n) for n in range(order + 1)], ring)
        p = prec or default_precision()
        with workprec(p):
            return cls([f(n) for n in range(order + 1)], ring, p)

    @classmethod
    def exp_z(cls, order: int, c=1, ring: str = RING_RATIONAL, prec: int | None = None) -> "TruncatedSeries":
        """``exp(c z)`` to the given order."""
        if ring == RING_RATIONAL:
            c = Fraction(c)
            out, t = [], Fraction(1)
            for n in range(order + 1):
                out.append(t)
                t = t * c / (n + 1)
            return cls._raw(out, ring, None)
        p = prec or default_precision()
        with workprec(p):
            c = _convert(c, ring)
            out, t = [], _convert(1, ring)
            for n in range(order + 1):
                out.append(t)
                t = t * c / (n + 1)
        return cls._raw(out, ring, p)

    # -- basic accessors --------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, n: int):
        return self.coeffs[n] if 0 <= n <= self.order else _zero(self.ring)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self.coeffs[:4])
        more = ", ..." if self.order > 3 else ""
        return f"TruncatedSeries([{head}{more}], ring={self.ring}, order={self.order})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.ring == other.ring and self.coeffs == other.coeffs

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return TruncatedSeries._raw(self.coeffs[: order + 1], self.ring, self.prec)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def _check(self, other: "TruncatedSeries") -> int:
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected a TruncatedSeries")
        if other.ring != self.ring:
            raise RingMismatch(f"ring {self.ring} vs {other.ring}")
        if other.prec != self.prec:
            raise RingMismatch(f"precision {self.prec} vs {other.prec}")
        return min(self.order, other.order)

    def _ctx(self):
        return workprec(self.prec) if self.prec else _NullCtx()

    def _new(self, coeffs: list) -> "TruncatedSeries":
        return TruncatedSeries._raw(coeffs, self.ring, self.prec)

    def _nonzero(self, limit: int) -> list[int]:
        return [i for i in range(min(limit, self.order) + 1) if self.coeffs[i] != 0]

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            with self._ctx():
                c = list(self.coeffs)
                c[0] = c[0] + _convert(other, self.ring)
            return self._new(c)
        n = self._check(other)
        with self._ctx():
            return self._new([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)])

    __radd__ = __add__

    def __neg__(self):
        return self._new([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            with self._ctx():
                k = _convert(other, self.ring)
                return self._new([c * k for c in self.coeffs])
        n = self._check(other)
        a, b = self.coeffs, other.coeffs
        with self._ctx():
            nz_b = other._nonzero(n)
            nz_a = self._nonzero(n)
            if len(nz_b) * 4 < n + 1 or len(nz_a) * 4 < n + 1:
                if len(nz_a) < len(nz_b):
                    a, b, nz_b = b, a, nz_a
                out = [_zero(self.ring)] * (n + 1)
                for j in nz_b:
                    bj = b[j]
                    for i in range(n + 1 - j):
                        out[i + j] += a[i] * bj
                return self._new(out)
            if self.ring == RING_RATIONAL:
                return self._new([_dot(self.ring, a[: m + 1], b[m::-1]) for m in range(n + 1)])
            return self._new([mpmath.fdot(a[: m + 1], b[m::-1]) for m in range(n + 1)])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            with self._ctx():
                k = _convert(other, self.ring)
                if k == 0:
                    raise ZeroDivisionError("series divided by zero scalar")
                return self._new([c / k for c in self.coeffs])
        n = self._check(other)
        b = other.coeffs
        if b[0] == 0:
            raise SingularSeries("division by a series with zero constant term")
        a = self.coeffs
        with self._ctx():
            nz = [j for j in other._nonzero(n) if j > 0]
            inv0 = 1 / b[0]
            q = []
            if len(nz) * 4 < n + 1:
                for m in range(n + 1):
                    s = a[m]
                    for j in nz:
                        if j > m:
                            break
                        s -= b[j] * q[m - j]
                    q.append(s * inv0)
            else:
                for m in range(n + 1):
                    s = a[m] - _dot(self.ring, b[1 : m + 1], q[::-1]) if m else a[0]
                    q.append(s * inv0)
            return self._new(q)

    def reciprocal(self) -> "TruncatedSeries":
        """``1/a`` via the coefficient recurrence ``sum_k a_k d_{n-k} = [n=0]``.

        Exact in the rational ring.  In the high-precision rings the
        recurrence can amplify rounding errors (alternating series);
        callers certify results with ``stable_evaluate`` rather than with
        a residual, because the residual of a recurrence-built reciprocal
        sits at rounding level by construction.
        """
        one = self._new([_convert(1, self.ring)] + [_zero(self.ring)] * self.order)
        return one / self

    def derivative(self) -> "TruncatedSeries":
        if self.order == 0:
            return self._new([_zero(self.ring)])
        with self._ctx():
            return self._new([self.coeffs[n] * n for n in range(1, self.order + 1)])

    def integral(self) -> "TruncatedSeries":
        """Antiderivative with zero constant term, order raised by one."""
        with self._ctx():
            return self._new([_zero(self.ring)] + [c / (n + 1) for n, c in enumerate(self.coeffs)])

    def scale_arg(self, c) -> "TruncatedSeries":
        """Series of ``a(c z)``."""
        with self._ctx():
            c = _convert(c, self.ring)
            out, t = [], _convert(1, self.ring)
            for a in self.coeffs:
                out.append(a * t)
                t = t * c
            return self._new(out)

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``z**k`` keeping the order."""
        z = [_zero(self.ring)] * k
        return self._new((z + self.coeffs)[: self.order + 1])

    def exp(self) -> "TruncatedSeries":
        """``exp(a)``; needs ``a_0 = 0`` in the rational ring."""
        a = self.coeffs
        n = self.order
        with self._ctx():
            if self.ring == RING_RATIONAL:
                if a[0] != 0:
                    raise DomainError("exp of a rational series needs a zero constant term")
                e0 = Fraction(1)
            else:
                e0 = mpmath.exp(a[0])
            ka = [a[k] * k for k in range(n + 1)]
            nz = [k for k in range(1, n + 1) if a[k] != 0]
            e = [e0]
            sparse = len(nz) * 4 < n + 1
            for m in range(1, n + 1):
                if sparse:
                    s = _zero(self.ring)
                    for k in nz:
                        if k > m:
                            break
                        s += ka[k] * e[m - k]
                else:
                    s = _dot(self.ring, ka[1 : m + 1], e[::-1])
                e.append(s / m)
            return self._new(e)

    def log(self) -> "TruncatedSeries":
        """Principal logarithm; needs ``a_0 = 1`` in the rational ring."""
        a = self.coeffs
        if a[0] == 0:
            raise SingularSeries("log of a series with zero constant term")
        if self.ring == RING_RATIONAL and a[0] != 1:
            raise SingularSeries("log of a rational series needs constant term 1")
        with self._ctx():
            da = self.derivative()
            q = (da / self).integral()
            c = list(q.coeffs[: self.order + 1])
            if self.ring != RING_RATIONAL:
                c[0] = mpmath.log(a[0])
            return self._new(c)

    def __call__(self, x):
        """Horner evaluation of the truncated polynomial at ``x``."""
        with self._ctx():
            acc = _zero(self.ring) if self.ring != RING_RATIONAL else Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc

    def to_json(self) -> list[str]:
        """Coefficients as decimal (or ``p/q``) strings."""
        if self.ring == RING_RATIONAL:
            return [str(c) for c in self.coeffs]
        digits = max(1, int(self.prec * math.log10(2)))
        return [mpmath.nstr(c, digits) for c in self.coeffs]


class _NullCtx:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def hadamard_exp(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Exponential Hadamard product: ``c_n = a_n * b_n * n!``."""
    n = a._check(b)
    with a._ctx():
        out = []
        f = 1
        for m in range(n + 1):
            if m:
                f *= m
            out.append(a.coeffs[m] * b.coeffs[m] * f)
        return a._new(out)


# ---------------------------------------------------------------------------
# Tree functions
# ---------------------------------------------------------------------------


def tree_series(which: str, order: int) -> TruncatedSeries:
    """Exact series of the rooted tree function ``T`` or of ``U = T - T^2/2``.

    ``[z^n] T = n^(n-1) / n!``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    t = TruncatedSeries(
        [Fraction(0)] + [Fraction(n ** (n - 1), math.factorial(n)) for n in range(1, order + 1)]
    )
    if which == "T":
        return t
    if which == "U":
        return t - t * t * Fraction(1, 2)
    raise ValueError(f"unknown tree series {which!r}")


def _puiseux_seed(x):
    # T = 1 - d + d^2/3 - 11 d^3/72 + 43 d^4/540 with d = sqrt(2(1 - e x))
    d = mpmath.sqrt(2 * (1 - mpmath.e * x))
    return 1 - d + d**2 / 3 - 11 * d**3 / 72 + 43 * d**4 / 540


def tree_eval(which: str, x, prec: int | None = None, max_iter: int = 200):
    """Evaluate ``T(x)`` (or ``U(x)``) on the principal branch.

    ``T`` solves ``T exp(-T) = x`` with ``T(0) = 0``; the branch cut is
    the real ray ``(1/e, +inf)``.  Newton's method is seeded with the
    Puiseux expansion around ``1/e`` when ``x`` is close to it, with the
    Maclaurin series for small ``|x|`` and with the usual logarithmic
    asymptotics otherwise.  Real arguments give real results.
    """
    if which not in ("T", "U"):
        raise ValueError(f"unknown tree function {which!r}")
    bits = prec or default_precision()
    with workprec(bits + 20):
        x = mpmath.mpmathify(x)
        real_input = not isinstance(x, mpc) or x.imag == 0
        xr = mpmath.re(x)
        if real_input and xr > 1 / mpmath.e:
            raise DomainError(f"argument {mpmath.nstr(xr, 8)} lies on the branch cut (1/e, inf)")
        if x == 0:
            t = mpf(0)
        else:
            if abs(1 - mpmath.e * x) < mpf("0.5"):
                t = _puiseux_seed(mpc(x) if not real_input else xr)
            elif abs(x) < mpf("0.3"):
                t = x + x**2 + 3 * x**3 / 2 + 8 * x**4 / 3
            else:
                y = -mpc(x)
                l1 = mpmath.log(y)
                t = -(l1 - mpmath.log(l1))
            if real_input:
                t = mpmath.re(t)
                x = xr
            eps = mpmath.ldexp(1, -bits - 10)
            for _ in range(max_iter):
                ex = x * mpmath.exp(t)
                f = t - ex
                fp = 1 - ex
                if fp == 0:
                    break
                step = f / fp
                t = t - step
                if abs(step) <= eps * max(1, abs(t)):
                    break
            else:
                raise NumericalFailure("tree function Newton iteration did not converge", partial=t)
        if which == "U":
            t = t - t * t / 2
    with workprec(bits):
        return +t


# ---------------------------------------------------------------------------
# Bivariate series (rational ring)
# ---------------------------------------------------------------------------


def _pmul(a: list, b: list, nw: int) -> list:
    out = [Fraction(0)] * (nw + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(min(len(b), nw + 1 - i)):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


def _pinv(a: list, nw: int) -> list:
    if a[0] == 0:
        raise SingularSeries("constant slice is not invertible")
    inv0 = 1 / a[0]
    d = [inv0]
    for m in range(1, nw + 1):
        s = sum((a[k] * d[m - k] for k in range(1, min(m, len(a) - 1) + 1) if a[k]), Fraction(0))
        d.append(-s * inv0)
    return d


class BivariateSeries:
    """Exact series ``sum c[n][m] z^n w^m`` truncated at ``(N_z, N_w)``.

    Coefficients are ordinary in both variables.  Operations act on the
    z-direction with each coefficient being a truncated power series in
    ``w``.
    """

    __slots__ = ("coeffs", "nz", "nw")

    def __init__(self, coeffs: Sequence[Sequence], nz: int, nw: int):
        rows = []
        for n in range(nz + 1):
            row = list(coeffs[n]) if n < len(coeffs) else []
            row = [Fraction(c) for c in row[: nw + 1]]
            row += [Fraction(0)] * (nw + 1 - len(row))
            rows.append(row)
        self.coeffs = rows
        self.nz = nz
        self.nw = nw

    @classmethod
    def from_function(cls, f: Callable[[int, int], Fraction], nz: int, nw: int) -> "BivariateSeries":
        return cls([[f(n, m) for m in range(nw + 1)] for n in range(nz + 1)], nz, nw)

    @property
    def orders(self) -> tuple[int, int]:
        return self.nz, self.nw

    def coeff_extract(self, n: int, m: int) -> Fraction:
        if 0 <= n <= self.nz and 0 <= m <= self.nw:
            return self.coeffs[n][m]
        return Fraction(0)

    def z_slice(self, m: int) -> TruncatedSeries:
        """Coefficient of ``w^m`` as a series in ``z``."""
        return TruncatedSeries([row[m] for row in self.coeffs])

    def _dims(self, other: "BivariateSeries") -> tuple[int, int]:
        return min(self.nz, other.nz), min(self.nw, other.nw)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        return self.orders == other.orders and self.coeffs == other.coeffs

    def __add__(self, other: "BivariateSeries") -> "BivariateSeries":
        nz, nw = self._dims(other)
        return BivariateSeries(
            [[self.coeffs[n][m] + other.coeffs[n][m] for m in range(nw + 1)] for n in range(nz + 1)], nz, nw
        )

    def __neg__(self) -> "BivariateSeries":
        return BivariateSeries([[-c for c in row] for row in self.coeffs], self.nz, self.nw)

    def __sub__(self, other: "BivariateSeries") -> "BivariateSeries":
        return self + (-other)

    def scale(self, k) -> "BivariateSeries":
        k = Fraction(k)
        return BivariateSeries([[c * k for c in row] for row in self.coeffs], self.nz, self.nw)

    def __mul__(self, other: "BivariateSeries") -> "BivariateSeries":
        nz, nw = self._dims(other)
        out = [[Fraction(0)] * (nw + 1) for _ in range(nz + 1)]
        for i in range(nz + 1):
            a = self.coeffs[i][: nw + 1]
            if not any(a):
                continue
            for j in range(nz + 1 - i):
                b = other.coeffs[j][: nw + 1]
                if not any(b):
                    continue
                prod = _pmul(a, b, nw)
                row = out[i + j]
                for m in range(nw + 1):
                    row[m] += prod[m]
        return BivariateSeries(out, nz, nw)

    def reciprocal(self) -> "BivariateSeries":
        nz, nw = self.nz, self.nw
        inv0 = _pinv(self.coeffs[0], nw)
        d = [inv0]
        for n in range(1, nz + 1):
            acc = [Fraction(0)] * (nw + 1)
            for k in range(1, n + 1):
                if not any(self.coeffs[k]):
                    continue
                prod = _pmul(self.coeffs[k], d[n - k], nw)
                for m in range(nw + 1):
                    acc[m] += prod[m]
            d.append([-c for c in _pmul(acc, inv0, nw)])
        return BivariateSeries(d, nz, nw)

    def log(self) -> "BivariateSeries":
        """Logarithm along ``z``; the constant slice must be exactly 1."""
        c0 = self.coeffs[0]
        if c0[0] != 1 or any(c0[1:]):
            raise SingularSeries("log needs constant slice equal to 1")
        nz, nw = self.nz, self.nw
        # n b_n = n a_n - sum_{k=1}^{n-1} k b_k a_{n-k}
        b = [[Fraction(0)] * (nw + 1)]
        for n in range(1, nz + 1):
            acc = [c * n for c in self.coeffs[n]]
            for k in range(1, n):
                if not any(b[k]) or not any(self.coeffs[n - k]):
                    continue
                prod = _pmul(b[k], self.coeffs[n - k], nw)
                for m in range(nw + 1):
                    acc[m] -= k * prod[m]
            b.append([c / n for c in acc])
        return BivariateSeries(b, nz, nw)

    def hadamard_z(self, other: "BivariateSeries") -> "BivariateSeries":
        """Exponential Hadamard product in ``z`` with ordinary products in ``w``."""
        nz, nw = self._dims(other)
        out = []
        f = 1
        for n in range(nz + 1):
            if n:
                f *= n
            prod = _pmul(self.coeffs[n][: nw + 1], other.coeffs[n][: nw + 1], nw)
            out.append([c * f for c in prod])
        return BivariateSeries(out, nz, nw)

    def is_zero(self) -> bool:
        return all(c == 0 for row in self.coeffs for c in row)
