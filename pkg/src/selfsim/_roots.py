"""Bracketed root finding for monotone maps that may be undefined on part of the bracket."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq


class BracketExhausted(RuntimeError):
    pass


def _sgn(x: float) -> int:
    return 1 if x > 0 else (-1 if x < 0 else 0)


def monotone_root(fun: Callable[[float], float], lo: float, hi: float, *,
                  xtol: float = 1e-12, maxiter: int = 200) -> float:
    """Root of ``fun`` on ``[lo, hi]``.

    ``fun`` may return ``+-inf`` where the underlying quantity does not exist;
    plain bisection is used until both ends are finite, then Brent's method.
    """
    f_lo, f_hi = fun(lo), fun(hi)
    if _sgn(f_lo) == 0:
        return lo
    if _sgn(f_hi) == 0:
        return hi
    if _sgn(f_lo) == _sgn(f_hi):
        raise BracketExhausted(f"no sign change on [{lo}, {hi}]: {f_lo}, {f_hi}")
    it = 0
    while (math.isinf(f_lo) or math.isinf(f_hi)) and hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = fun(mid)
        if _sgn(f_mid) == 0:
            return mid
        if _sgn(f_mid) == _sgn(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        it += 1
        if it > maxiter:
            break
    if math.isinf(f_lo) or math.isinf(f_hi):
        return 0.5 * (lo + hi)
    return brentq(fun, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=maxiter)


def expand_bracket(fun: Callable[[float], float], seed: float, *, increasing: bool,
                   lower_limit: float = 0.0, upper_limit: float = math.inf,
                   factor: float = 1.5, maxiter: int = 60) -> tuple[float, float]:
    """Grow a sign-change bracket around ``seed`` for a monotone ``fun``.

    Upward steps are geometric (``x *= factor``); downward steps shrink the gap
    to ``lower_limit`` by ``factor``.
    """
    f_seed = fun(seed)
    if f_seed == 0:
        return seed, seed
    # move toward the root: up if fun is below zero and increasing, etc.
    go_up = (f_seed < 0) == increasing
    x = seed
    for _ in range(maxiter):
        if go_up:
            nxt = x * factor
            if nxt > upper_limit:
                nxt = upper_limit
        else:
            nxt = lower_limit + (x - lower_limit) / factor
        f_nxt = fun(nxt)
        if _sgn(f_nxt) != _sgn(f_seed):
            return (x, nxt) if go_up else (nxt, x)
        if nxt == upper_limit:
            break
        x = nxt
    raise BracketExhausted(f"no sign change found from seed {seed}")
