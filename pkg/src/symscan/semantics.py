"""Numeric meaning of cataloged factor kinds, used only by the verifier.

Deterministic kinds map input values to an output value, exactly in
:class:`~fractions.Fraction` when the operation is rational.  Stochastic
kinds return a log density as an ``mpmath`` float.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import mpmath

mpmath.mp.dps = 50

__all__ = ["DETERMINISTIC", "STOCHASTIC", "to_mpf", "has_semantics", "NEG_INF"]

NEG_INF = mpmath.mpf("-inf")


def to_mpf(x):
    if isinstance(x, bool):
        return mpmath.mpf(int(x))
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _exact(x):
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def _lift(*xs):
    """Keep exact inputs exact; otherwise move everything to mpf."""
    if all(map(_exact, xs)):
        return xs
    return tuple(to_mpf(x) for x in xs)


def _binary(op):
    return lambda a, b: op(*_lift(a, b))


def _sum(xs):
    xs = _lift(*xs)
    return sum(xs, Fraction(0)) if all(map(_exact, xs)) else mpmath.fsum(xs)


def _inner(ws, xs):
    vals = _lift(*ws, *xs)
    n = len(ws)
    return _sum([w * x for w, x in zip(vals[:n], vals[n:])])


def _tanh(x):
    return mpmath.tanh(to_mpf(x))


def _argmax(values) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def _rot_x(x, y, a):
    a = to_mpf(a)
    return to_mpf(x) * mpmath.cos(a) - to_mpf(y) * mpmath.sin(a)


def _rot_y(x, y, a):
    a = to_mpf(a)
    return to_mpf(x) * mpmath.sin(a) + to_mpf(y) * mpmath.cos(a)


DETERMINISTIC: dict[str, Callable] = {
    "plus": _binary(lambda a, b: a + b),
    "minus": _binary(lambda a, b: a - b),
    "times": _binary(lambda a, b: a * b),
    "ternary_plus": lambda a, b, d: _sum([a, b, d]),
    "copy": lambda x: x,
    "square": lambda x: x * x,
    "tanh": _tanh,
    "is_positive": lambda x: x >= 0,
    "nary_sum": _sum,
    "inner_product": _inner,
    "argmax": _argmax,
    "rot_x": _rot_x,
    "rot_y": _rot_y,
}


def _log(x):
    x = to_mpf(x)
    return mpmath.log(x) if x > 0 else NEG_INF


def _gaussian(mu, v, x):
    v = to_mpf(v)
    if v <= 0:
        return NEG_INF
    d = to_mpf(x) - to_mpf(mu)
    return -mpmath.log(2 * mpmath.pi * v) / 2 - d * d / (2 * v)


def _gaussian_prec(mu, tau, x):
    tau = to_mpf(tau)
    if tau <= 0:
        return NEG_INF
    d = to_mpf(x) - to_mpf(mu)
    return mpmath.log(tau / (2 * mpmath.pi)) / 2 - tau * d * d / 2


def _gamma(shape, rate, x):
    shape, rate, x = to_mpf(shape), to_mpf(rate), to_mpf(x)
    if shape <= 0 or rate <= 0 or x <= 0:
        return NEG_INF
    return shape * mpmath.log(rate) - mpmath.loggamma(shape) + (shape - 1) * mpmath.log(x) - rate * x


def _nonneg(x):
    return mpmath.mpf(0) if to_mpf(x) >= 0 else NEG_INF


def _bernoulli(p, b):
    p = to_mpf(p)
    if not 0 <= p <= 1:
        return NEG_INF
    return _log(p if b else 1 - p)


def _discrete(ps, y):
    # outside the simplex the density is zero
    if not 0 <= y < len(ps) or abs(mpmath.fsum(map(to_mpf, ps)) - 1) > mpmath.mpf(10) ** -30:
        return NEG_INF
    return _log(ps[y])


# stochastic kinds receive the value-range size of their output as ``size``
STOCHASTIC: dict[str, Callable] = {
    "gaussian": lambda mu, v, x, size=None: _gaussian(mu, v, x),
    "gaussian_prec": lambda mu, tau, x, size=None: _gaussian_prec(mu, tau, x),
    "gamma": lambda shape, rate, x, size=None: _gamma(shape, rate, x),
    "constrain_nonneg": lambda x, size=None: _nonneg(x),
    "bernoulli": lambda p, b, size=None: _bernoulli(p, b),
    "discrete": lambda ps, y, size=None: _discrete(ps, y),
    "uniform_discrete": lambda y, size=None: -mpmath.log(size) if 0 <= y < size else NEG_INF,
}


def has_semantics(kind: str) -> bool:
    return kind in DETERMINISTIC or kind in STOCHASTIC
