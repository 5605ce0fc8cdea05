"""Shooting from the origin and from infinity.

The infinity shooter works with ``h(t) = t**alpha * f(1/t)``, which turns the
profile equation into

    t^2 h'' - (2 alpha + N - 3) t h' + lam h'/(2t) + alpha (alpha + N - 2) h = 0.

Near ``t = 0`` the regular solution has the (asymptotic) expansion
``h = sum c_m t^(2m)`` with ``c_{m+1} = -c_m (alpha-2m)(alpha+N-2-2m) / (lam (m+1))``,
which terminates for even integer ``alpha`` (heat polynomials).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from ._roots import BracketExhausted, expand_bracket, monotone_root
from .profile_ode import (
    ATOL,
    DERIVATIVE_FLOOR,
    RTOL,
    Branch,
    IntegrationError,
    ProblemParams,
    ProfilePiece,
    SelfSimilarProfile,
    Sign,
    TailClass,
    TailKind,
    TangencyError,
    Unsupported,
    default_horizon,
    integrate_profile,
)

__all__ = [
    "Side",
    "InfinityShot",
    "ZeroMapSample",
    "ZeroAbsent",
    "rhs_infinity",
    "infinity_series",
    "infinity_threshold",
    "shoot_origin",
    "shoot_infinity",
    "zero_map",
    "zero_or_none",
    "inverse_zero_map",
    "classify_tail",
]

T_SMIN = 1e-3
MAX_ZEROS = 8


class ZeroAbsent(LookupError):
    """The requested zero does not exist for this homogeneity."""


class Side(enum.Enum):
    FROM_ORIGIN = "origin"
    FROM_INFINITY = "infinity"


def infinity_threshold(N: int) -> float:
    """Smallest homogeneity for which the infinity shot is guaranteed a zero."""
    return max(2.0 - N, (3.0 - N) / 2.0, 0.0)


def rhs_infinity(t: float, h: float, hp: float, branch: Branch, params: ProblemParams) -> float:
    if not t > 0:
        raise ValueError("rhs_infinity requires t > 0")
    a, N = params.alpha, params.N
    return ((2 * a + N - 3) * t * hp - branch.lam * hp / (2 * t) - a * (a + N - 2) * h) / (t * t)


def infinity_series(alpha: float, N: int, lam: float, t, h0: float = 1.0):
    """Optimally truncated expansion of the regular solution at ``t = 0``.

    Returns ``(h, h')`` at ``t``; summation stops at the smallest term.
    """
    t = float(t)
    c = h0
    h, hp = c, 0.0
    prev = abs(c)
    t2 = t * t
    tpow = 1.0
    for m in range(400):
        c = -c * (alpha - 2 * m) * (alpha + N - 2 - 2 * m) / (lam * (m + 1))
        if c == 0.0:
            break
        tpow_prev = tpow
        tpow *= t2
        term = c * tpow
        if m > 1 and abs(term) > prev:
            break
        h += term
        hp += c * 2 * (m + 1) * tpow_prev * t
        prev = abs(term)
        if abs(term) <= 1e-18 * abs(h):
            break
    return h, hp


@functools.lru_cache(maxsize=1024)
def _series_coefficients(alpha: float, N: int, lam: float, t_trunc: float) -> tuple[float, ...]:
    """Coefficients ``c_0..c_M`` (with ``c_0 = 1``) truncated as at ``t_trunc``."""
    coef = [1.0]
    c, prev, h = 1.0, 1.0, 1.0
    t2 = t_trunc * t_trunc
    tpow = 1.0
    for m in range(400):
        c = -c * (alpha - 2 * m) * (alpha + N - 2 - 2 * m) / (lam * (m + 1))
        if c == 0.0:
            break
        tpow *= t2
        term = abs(c * tpow)
        if m > 1 and term > prev:
            break
        coef.append(c)
        h += c * tpow
        prev = term
        if term <= 1e-18 * abs(h):
            break
    return tuple(coef)


def _even_poly(coef, x):
    x2 = x * x
    out = np.zeros_like(x)
    for c in reversed(coef):
        out = out * x2 + c
    return out


def _even_poly_deriv(coef, x):
    x2 = x * x
    out = np.zeros_like(x)
    for m in range(len(coef) - 1, 0, -1):
        out = out * x2 + 2 * m * coef[m]
    return out * x


def _series_start_radius(alpha: float, N: int, lam: float, horizon: float) -> float:
    # far enough out that the asymptotic series is accurate to roundoff
    return max(horizon, 4.0 * (alpha + N), math.sqrt(160.0 / lam))


@dataclass(frozen=True)
class _TPiece:
    t_a: float
    t_b: float
    branch: Branch
    sign: Sign
    sol: object


@dataclass(frozen=True)
class InfinityShot:
    """Solution of the inverted problem, integrated in ``t = 1/s``."""

    params: ProblemParams
    infinity_sign: Sign
    pieces: tuple[_TPiece, ...]
    t_zeros: tuple[float, ...]
    t_zero_derivatives: tuple[float, ...]
    t_start: float
    fixed_branch: bool = False

    @property
    def mapped_zeros(self) -> tuple[float, ...]:
        """Zeros in ``s``, ascending (closest to the origin first)."""
        return tuple(sorted(1.0 / t for t in self.t_zeros))

    @property
    def outer_zeros(self) -> tuple[float, ...]:
        """Zeros in ``s`` in the order met when coming from infinity."""
        return tuple(1.0 / t for t in self.t_zeros)

    def h(self, t):
        """Return ``(h(t), h'(t))``."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        h = np.full_like(t_arr, math.nan)
        hp = np.full_like(t_arr, math.nan)
        near = t_arr <= self.t_start
        if near.any():
            coef = _series_coefficients(self.params.alpha, self.params.N,
                                        self.pieces[0].branch.lam, self.t_start)
            x = t_arr[near]
            h[near] = float(self.infinity_sign) * _even_poly(coef, x)
            hp[near] = float(self.infinity_sign) * _even_poly_deriv(coef, x)
        ends = np.array([p.t_b for p in self.pieces])
        idx = np.searchsorted(ends, t_arr, side="left")
        for i in np.unique(idx[~near]):
            if i >= len(self.pieces):
                continue
            m = (idx == i) & ~near
            y = self.pieces[i].sol(t_arr[m])
            h[m], hp[m] = y[0], y[1]
        return h, hp

    def f(self, s):
        """Return ``(f(s), f'(s))`` with ``f(s) = s**alpha h(1/s)``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        a = self.params.alpha
        h, hp = self.h(1.0 / s)
        return s**a * h, a * s ** (a - 1) * h - s ** (a - 2) * hp

    def tail_piece(self, scale: float = 1.0) -> ProfilePiece:
        """The outermost sign-definite piece as a profile piece on ``[s~_1, inf)``."""
        if not self.t_zeros:
            raise ZeroAbsent("infinity shot has no zero")
        z = 1.0 / self.t_zeros[0]
        a = self.params.alpha
        slope = -(z ** (a - 2)) * self.t_zero_derivatives[0]

        def evaluate(s):
            s_arr = np.asarray(s, dtype=float)
            f, fp = self.f(s_arr)
            if s_arr.ndim == 0:
                return scale * f[0], scale * fp[0]
            return scale * f, scale * fp

        sign = self.infinity_sign if scale > 0 else self.infinity_sign.flip()
        return ProfilePiece(z, math.inf, self.pieces[0].branch, sign, evaluate,
                            (0.0, scale * slope))


@dataclass(frozen=True)
class ZeroMapSample:
    alpha: float
    sign: Sign
    k: int
    value: float
    side: Side


# -- origin side ---------------------------------------------------------------


@functools.lru_cache(maxsize=512)
def _cached_origin(alpha: float, N: int, sign: Sign, max_zeros: int, horizon: float,
                   fixed_branch: bool, rtol: float, atol: float) -> SelfSimilarProfile:
    params = ProblemParams(N, alpha, sign)
    return integrate_profile(params, max_zeros=max_zeros, horizon=horizon,
                             fixed_branch=fixed_branch, rtol=rtol, atol=atol)


def shoot_origin(params: ProblemParams, max_zeros: int = MAX_ZEROS,
                 horizon: Optional[float] = None, *, fixed_branch: bool = False,
                 rtol: float = RTOL, atol: float = ATOL) -> SelfSimilarProfile:
    """Switching solution from ``f(0) = +-1``; has at least one zero for every alpha."""
    if horizon is None:
        horizon = default_horizon(params.N)
    return _cached_origin(float(params.alpha), int(params.N), Sign(params.origin_sign),
                          int(max_zeros), float(horizon), bool(fixed_branch),
                          float(rtol), float(atol))


# -- infinity side -------------------------------------------------------------


def _integrate_t_piece(t0, h0, hp0, branch, sign, params, t_end, rtol, atol, stop_at_zero):
    a, N = params.alpha, params.N
    c1 = 2 * a + N - 3
    c0 = a * (a + N - 2)
    half_lam = branch.lam / 2

    def fun(t, y):
        return [y[1], (c1 * t * y[1] - half_lam * y[1] / t - c0 * y[0]) / (t * t)]

    def zero_event(t, y):
        return y[0]

    zero_event.terminal = True
    zero_event.direction = -int(sign)
    events = [zero_event] if stop_at_zero else None
    res = solve_ivp(fun, (t0, t_end), [h0, hp0], method="DOP853", rtol=rtol, atol=atol,
                    events=events, dense_output=True)
    if res.status == -1:
        raise IntegrationError(res.message)
    if res.status == 1:
        t_star = float(res.t_events[0][0])
        hp_star = float(res.y_events[0][0][1])
        return res.sol, float(res.t[-1]), (t_star, hp_star)
    return res.sol, float(res.t[-1]), None


@functools.lru_cache(maxsize=512)
def _cached_infinity(alpha: float, N: int, sign: Sign, max_zeros: int, s_min: float,
                     horizon: float, fixed_branch: bool, rtol: float,
                     atol: float) -> InfinityShot:
    params = ProblemParams(N, alpha, sign)
    branch = sign.branch
    s0 = _series_start_radius(alpha, N, branch.lam, horizon)
    t0 = 1.0 / s0
    h0, hp0 = infinity_series(alpha, N, branch.lam, t0, float(sign))
    t_end = 1.0 / s_min
    pieces, tz, tzd = [], [], []
    t, cur_sign = t0, sign
    while True:
        sol, t_last, hit = _integrate_t_piece(t, h0, hp0, branch, cur_sign, params, t_end,
                                              rtol, atol, stop_at_zero=True)
        pieces.append(_TPiece(t, t_last, branch, cur_sign, sol))
        if hit is None:
            break
        t_star, hp_star = hit
        # f'(s*) = -s*^(alpha-2) h'(t*)
        if abs(hp_star) * (1.0 / t_star) ** (alpha - 2) < DERIVATIVE_FLOOR:
            raise TangencyError(f"degenerate zero at t={t_star:.12g}")
        tz.append(t_star)
        tzd.append(hp_star)
        if len(tz) >= max_zeros:
            break
        cur_sign = cur_sign.flip()
        if not fixed_branch:
            branch = branch.other()
        t, h0, hp0 = t_star, 0.0, hp_star
    return InfinityShot(params, sign, tuple(pieces), tuple(tz), tuple(tzd), t0, fixed_branch)


def shoot_infinity(params: ProblemParams, infinity_sign: "Sign | str | int",
                   max_zeros: int = MAX_ZEROS, *, s_min: float = T_SMIN,
                   horizon: Optional[float] = None, fixed_branch: bool = False,
                   rtol: float = RTOL, atol: float = ATOL) -> InfinityShot:
    """Integrate the inverted problem from ``h(0) = +-1, h'(0) = 0``.

    ``params.origin_sign`` is ignored; ``infinity_sign`` is the sign of the
    profile near ``s = +inf``.  Integration runs up to ``t = 1/s_min``.
    """
    thr = infinity_threshold(params.N)
    if not params.alpha > thr:
        raise Unsupported(f"infinity shooting needs alpha > {thr} for N={params.N}")
    if horizon is None:
        horizon = default_horizon(params.N)
    return _cached_infinity(float(params.alpha), int(params.N), Sign.parse(infinity_sign),
                            int(max_zeros), float(s_min), float(horizon), bool(fixed_branch),
                            float(rtol), float(atol))


# -- zero maps -----------------------------------------------------------------


def zero_map(alpha: float, sign: "Sign | str", k: int, side: Side, N: int, *,
             fixed_branch: bool = False, max_zeros: int = MAX_ZEROS,
             horizon: Optional[float] = None) -> ZeroMapSample:
    """k-th zero of the origin shot, or the k-th zero met from infinity.

    From the origin zeros are counted outward; from infinity they are counted
    inward (``k = 1`` is the outermost zero), the ordering in which each map is
    continuous and monotone in ``alpha``.
    """
    sign = Sign.parse(sign)
    if k < 1:
        raise ValueError("k must be >= 1")
    if side is Side.FROM_ORIGIN:
        prof = shoot_origin(ProblemParams(N, alpha, sign), max(max_zeros, k), horizon,
                            fixed_branch=fixed_branch)
        zeros = prof.zeros
    else:
        shot = shoot_infinity(ProblemParams(N, alpha, sign), sign, max(max_zeros, k),
                              horizon=horizon, fixed_branch=fixed_branch)
        zeros = shot.outer_zeros
    if len(zeros) < k:
        raise ZeroAbsent(f"{side.value} shot (alpha={alpha}, sign={sign.label}, N={N}) "
                         f"has {len(zeros)} zero(s), asked for k={k}")
    return ZeroMapSample(float(alpha), sign, k, float(zeros[k - 1]), side)


def zero_or_none(alpha: float, sign, k: int, side: Side, N: int, **kw) -> Optional[float]:
    try:
        return zero_map(alpha, sign, k, side, N, **kw).value
    except (ZeroAbsent, Unsupported):
        return None


def inverse_zero_map(s: float, sign, k: int, side: Side, N: int, *,
                     xtol: float = 1e-12, seed: float = 2.0, **kw) -> float:
    """Homogeneity at which the (sign, k, side) zero sits at ``s``.

    Realizes the inverse maps of the decreasing origin map and the increasing
    infinity map by bracketed root finding.
    """
    sign = Sign.parse(sign)
    if side is Side.FROM_ORIGIN:
        # decreasing in alpha; a missing zero has escaped to +inf
        def d(a):
            z = zero_or_none(a, sign, k, side, N, **kw)
            return math.inf if z is None else z - s

        lo_lim = 0.0
        increasing = False
    else:
        thr = infinity_threshold(N)
        seed = max(seed, thr + 1.0) if seed <= thr else seed

        # increasing in alpha; a missing zero has not yet entered from s = 0
        def d(a):
            if a <= thr:
                return -math.inf
            z = zero_or_none(a, sign, k, side, N, **kw)
            return -math.inf if z is None else z - s

        lo_lim = thr
        increasing = True
    lo, hi = expand_bracket(d, seed, increasing=increasing, lower_limit=lo_lim,
                            upper_limit=500.0)
    if lo == hi:
        return lo
    return monotone_root(d, lo, hi, xtol=xtol)


def classify_tail(z: float, outward_sign, alpha: float, N: int, *,
                  alpha_tol: float = 1e-7) -> TailClass:
    """Tail trichotomy beyond a zero ``z`` with profile sign ``outward_sign`` after it.

    The homogeneity whose infinity shot has its outermost zero at ``z`` decides:
    equal -> algebraic growth, larger -> exponential growth, smaller -> the
    continuation changes sign again (``TailKind.SIGN_CHANGE``).
    """
    sign = Sign.parse(outward_sign)
    if not alpha > infinity_threshold(N):
        raise Unsupported(f"classification needs alpha > {infinity_threshold(N)}")
    a_tilde = inverse_zero_map(z, sign, 1, Side.FROM_INFINITY, N, seed=alpha)
    lam = sign.branch.lam
    if abs(alpha - a_tilde) <= alpha_tol * max(1.0, alpha):
        return TailClass(TailKind.ALGEBRAIC, lam)
    if alpha < a_tilde:
        return TailClass(TailKind.EXPONENTIAL, lam)
    return TailClass(TailKind.SIGN_CHANGE, lam)


def clear_caches() -> None:
    _cached_origin.cache_clear()
    _cached_infinity.cache_clear()


__all__ += ["clear_caches", "BracketExhausted", "TangencyError"]
