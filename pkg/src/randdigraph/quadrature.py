"""Tanh-sinh (double exponential) quadrature on finite real intervals.

The integrand may return a single number or a list of numbers; lists are
integrated component-wise with one shared set of nodes, which is how all
orders of a generalized Airy function are obtained from one contour pass.

Nodes are produced level by level (step ``h = 2**-level``); level ``m``
only adds the odd multiples of ``h``, so refinement reuses every earlier
function value.  Node tables are cached per ``(bits, level)`` and are a
deterministic function of those two integers, which lets callers cache
expensive integrand values keyed by the abscissa.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
from mpmath import mpf

from .scalar_core import NumericalFailure, workprec

__all__ = ["tanh_sinh", "node_table"]


def _tmax(bits: int) -> float:
    # Stop once 1 - |x| drops below 2**-bits: pi/2 sinh(t) ~ bits ln2 / 2.
    return math.asinh((bits * math.log(2) / 2 + 4) * 2 / math.pi)


@lru_cache(maxsize=256)
def node_table(bits: int, level: int) -> tuple[tuple[mpf, mpf], ...]:
    """Abscissae and unscaled weights on ``[-1, 1]`` new at ``level``.

    Each entry is ``(x, w)`` with ``w = pi/2 cosh t / cosh^2(pi/2 sinh t)``;
    the step ``h`` is applied by the caller.  Symmetric pairs are listed
    as two entries.
    """
    with workprec(bits + 20):
        h = mpf(2) ** (-level)
        tmax = _tmax(bits)
        jmax = int(tmax / float(h)) + 1
        out = []
        halfpi = mpmath.pi / 2
        for j in range(0 if level == 0 else 1, jmax + 1, 1 if level == 0 else 2):
            t = j * h
            u = halfpi * mpmath.sinh(t)
            ch = mpmath.cosh(u)
            w = halfpi * mpmath.cosh(t) / (ch * ch)
            x = mpmath.tanh(u)
            if 1 - x == 0:
                break
            out.append((x, w))
            if j:
                out.append((-x, w))
    return tuple(out)


def tanh_sinh(
    f: Callable[[mpf], object],
    a,
    b,
    bits: int,
    tol,
    min_level: int = 3,
    max_level: int = 11,
) -> tuple[object, mpf]:
    """Integrate ``f`` over ``[a, b]``.

    Returns ``(value, error_estimate)`` where the estimate is the change
    between the last two levels (maximum over vector components).  Raises
    :class:`NumericalFailure` when ``tol`` is not met by ``max_level``.
    """
    with workprec(bits):
        a = mpf(a)
        b = mpf(b)
        mid = (a + b) / 2
        half = (b - a) / 2
        acc = None
        prev = None
        vector = None
        err = mpf("inf")
        for level in range(max_level + 1):
            part = None
            for x, w in node_table(bits, level):
                v = f(mid + half * x)
                if vector is None:
                    vector = isinstance(v, (list, tuple))
                if vector:
                    if part is None:
                        part = [wi * 0 for wi in v]
                    part = [p + w * vi for p, vi in zip(part, v)]
                else:
                    part = w * v if part is None else part + w * v
            if part is None:
                continue
            if acc is None:
                acc = part
            elif vector:
                acc = [p + q for p, q in zip(acc, part)]
            else:
                acc = acc + part
            h = mpf(2) ** (-level)
            cur = [half * h * c for c in acc] if vector else half * h * acc
            if prev is not None:
                if vector:
                    err = max(abs(p - q) for p, q in zip(cur, prev))
                else:
                    err = abs(cur - prev)
                if level >= min_level and err <= tol:
                    return cur, err
            prev = cur
        raise NumericalFailure(
            f"tanh-sinh did not reach tolerance {mpmath.nstr(mpf(tol), 3)}", partial=prev, achieved=err
        )


def integrate_segments(
    f: Callable[[mpf], object], breakpoints: Sequence, bits: int, tol, **kw
) -> tuple[object, mpf]:
    """Sum of :func:`tanh_sinh` over consecutive breakpoint intervals."""
    total = None
    err = mpf(0)
    n = len(breakpoints) - 1
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        v, e = tanh_sinh(f, a, b, bits, mpf(tol) / n, **kw)
        err += e
        if total is None:
            total = v
        elif isinstance(v, list):
            total = [p + q for p, q in zip(total, v)]
        else:
            total = total + v
    return total, err
