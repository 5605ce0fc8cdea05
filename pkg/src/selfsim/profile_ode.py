"""Piecewise-linear self-similar profile ODE.

A radial profile ``f`` of homogeneity ``alpha`` satisfies, on every interval
where it keeps a sign,

    f'' + ((N - 1)/s - lam*s/2) f' + (lam*alpha/2) f = 0,

with ``lam = 1`` where ``f > 0`` and ``lam = 2`` where ``f < 0``.  Pieces are
glued at zeros with continuous ``f'`` by restarting from ``(0, f'(s*))`` on the
opposite branch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "Sign",
    "Branch",
    "ProblemParams",
    "ProfilePiece",
    "SelfSimilarProfile",
    "TailKind",
    "TailClass",
    "ZeroCrossing",
    "HorizonReached",
    "Overflow",
    "TangencyError",
    "IntegrationError",
    "Unsupported",
    "branch_of",
    "rhs",
    "series_start_origin",
    "integrate_piece",
    "integrate_profile",
    "default_horizon",
    "RTOL",
    "ATOL",
    "EPSILON",
]

RTOL = 1e-12
ATOL = 1e-14
EPSILON = 1e-6
EVENT_TOL = 1e-13
OVERFLOW = 1e12
DERIVATIVE_FLOOR = 1e-9


class TangencyError(ArithmeticError):
    """A zero was reached with (numerically) vanishing slope."""


class IntegrationError(RuntimeError):
    pass


class Unsupported(ValueError):
    """Parameters outside the range where a construction is defined."""


class Sign(enum.IntEnum):
    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, text: "str | int | Sign") -> "Sign":
        if isinstance(text, (int, Sign)):
            return cls(int(text))
        key = text.strip().lower()
        if key in ("plus", "+", "+1", "positive", "1"):
            return cls.PLUS
        if key in ("minus", "-", "-1", "negative"):
            return cls.MINUS
        raise ValueError(f"unknown sign {text!r}")

    @property
    def branch(self) -> "Branch":
        return Branch.POSITIVE if self is Sign.PLUS else Branch.NEGATIVE

    def flip(self) -> "Sign":
        return Sign(-int(self))

    @property
    def label(self) -> str:
        return self.name.lower()


class Branch(enum.Enum):
    """The two linear regimes of the switching equation."""

    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def lam(self) -> float:
        return 1.0 if self is Branch.POSITIVE else 2.0

    @property
    def gamma(self) -> float:
        return 1.0 / self.lam

    @property
    def sign(self) -> Sign:
        return Sign.PLUS if self is Branch.POSITIVE else Sign.MINUS

    def other(self) -> "Branch":
        return Branch.NEGATIVE if self is Branch.POSITIVE else Branch.POSITIVE


def branch_of(value: float) -> Branch:
    """Branch selected by the sign of ``value``; zero is rejected."""
    if value > 0:
        return Branch.POSITIVE
    if value < 0:
        return Branch.NEGATIVE
    raise ValueError("branch undefined at an exact zero; resolve by crossing direction")


@dataclass(frozen=True)
class ProblemParams:
    N: int
    alpha: float
    origin_sign: Sign = Sign.PLUS

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"dimension must be an integer >= 1, got {self.N}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "origin_sign", Sign.parse(self.origin_sign))


def default_horizon(N: int) -> float:
    return 12.0 * max(1.0, math.sqrt(N))


def rhs(s: float, f: float, fp: float, branch: Branch, params: ProblemParams) -> float:
    """Second derivative ``f''`` from the profile equation on ``branch``."""
    if not s > 0:
        raise ValueError("rhs requires s > 0")
    lam = branch.lam
    return -((params.N - 1) / s - lam * s / 2) * fp - (lam * params.alpha / 2) * f


def series_coefficients(N: int, alpha: float, lam: float) -> tuple[float, float]:
    """Coefficients ``a, b`` of ``f = f(0) (1 + a s^2 + b s^4)`` near the origin."""
    a = -lam * alpha / (4 * N)
    b = lam * a * (2 - alpha) / (8 * N + 16)
    return a, b


def series_start_origin(params: ProblemParams, epsilon: float = EPSILON) -> tuple[float, float]:
    """State ``(f(eps), f'(eps))`` from the regular expansion at ``s = 0``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    f0 = float(params.origin_sign)
    a, b = series_coefficients(params.N, params.alpha, params.origin_sign.branch.lam)
    e2 = epsilon * epsilon
    return f0 * (1 + a * e2 + b * e2 * e2), f0 * (2 * a * epsilon + 4 * b * e2 * epsilon)


# -- events -----------------------------------------------------------------


@dataclass(frozen=True)
class ZeroCrossing:
    s: float
    fp: float


@dataclass(frozen=True)
class HorizonReached:
    s: float


@dataclass(frozen=True)
class Overflow:
    s: float


# -- pieces -----------------------------------------------------------------


@dataclass(frozen=True)
class ProfilePiece:
    """One sign-definite segment ``[a, b]`` of a profile.

    ``evaluate(s)`` returns arrays ``(f, f')``.  Pieces produced by the
    infinity shooter are defined up to ``b = inf``.
    """

    a: float
    b: float
    branch: Branch
    sign: Sign
    evaluate: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] = field(repr=False)
    end_state: tuple[float, float] = (math.nan, math.nan)
    steps: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, s):
        return self.evaluate(np.asarray(s, dtype=float))

    def scaled(self, c: float) -> "ProfilePiece":
        ev = self.evaluate

        def evaluate(s):
            f, fp = ev(s)
            return c * f, c * fp

        sign = self.sign if c > 0 else self.sign.flip()
        return ProfilePiece(self.a, self.b, self.branch, sign, evaluate,
                            (c * self.end_state[0], c * self.end_state[1]), self.steps)


def _origin_piece_evaluator(sol, params: ProblemParams, s_start: float):
    """Dense evaluation on ``[0, b]``; below ``s_start`` the origin series is used."""
    N, alpha = params.N, params.alpha
    f0 = float(params.origin_sign)
    a, b = series_coefficients(N, alpha, params.origin_sign.branch.lam)

    def evaluate(s):
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        f = np.empty_like(s)
        fp = np.empty_like(s)
        near = s < s_start
        if near.any():
            x = s[near]
            f[near] = f0 * (1 + a * x**2 + b * x**4)
            fp[near] = f0 * (2 * a * x + 4 * b * x**3)
        far = ~near
        if far.any():
            y = sol(s[far])
            f[far] = y[0]
            fp[far] = y[1]
        if scalar:
            return f[0], fp[0]
        return f, fp

    return evaluate


def _dense_evaluator(sol):
    def evaluate(s):
        y = sol(s)
        return y[0], y[1]

    return evaluate


def integrate_piece(
    start: tuple[float, float, float],
    branch: Branch,
    params: ProblemParams,
    horizon: float,
    *,
    stop_at_zero: bool = True,
    sign: Optional[Sign] = None,
    rtol: float = RTOL,
    atol: float = ATOL,
    overflow: float = OVERFLOW,
):
    """Integrate one branch equation from ``start = (s0, f0, f0')``.

    Stops at the first sign change of ``f`` (if ``stop_at_zero``), at
    ``horizon``, or when ``|f|`` exceeds ``overflow``.  Returns
    ``(piece, event)``; ``piece.evaluate`` is the dense output.
    """
    s0, f0, fp0 = start
    if not s0 > 0:
        raise ValueError("pieces start at s > 0; use series_start_origin for the origin")
    if sign is None:
        sign = Sign.PLUS if (f0 > 0 or (f0 == 0 and fp0 > 0)) else Sign.MINUS
    if f0 * sign < 0:
        raise ValueError("start value incompatible with the requested sign")
    N1 = params.N - 1.0
    lam = branch.lam
    half_lam = lam / 2
    la2 = lam * params.alpha / 2

    def fun(s, y):
        return [y[1], -(N1 / s - half_lam * s) * y[1] - la2 * y[0]]

    def zero_event(s, y):
        return y[0]

    zero_event.terminal = True
    zero_event.direction = -int(sign)

    def overflow_event(s, y):
        return abs(y[0]) - overflow

    overflow_event.terminal = True
    overflow_event.direction = 1

    events = [zero_event, overflow_event] if stop_at_zero else [overflow_event]
    res = solve_ivp(fun, (s0, horizon), [f0, fp0], method="DOP853", rtol=rtol, atol=atol,
                    events=events, dense_output=True)
    if res.status == -1:
        if abs(res.y[0, -1]) < 1e-9 and abs(res.y[1, -1]) < 1e-9:
            raise TangencyError(f"step size underflow near s={res.t[-1]:.6g}: {res.message}")
        raise IntegrationError(res.message)

    s_end = float(res.t[-1])
    f_end, fp_end = float(res.y[0, -1]), float(res.y[1, -1])
    event = HorizonReached(s_end)
    if res.status == 1:
        if stop_at_zero and res.t_events[0].size:
            s_star = float(res.t_events[0][0])
            fp_star = float(res.y_events[0][0][1])
            if abs(fp_star) < DERIVATIVE_FLOOR:
                raise TangencyError(f"degenerate zero at s={s_star:.12g}, f'={fp_star:.3e}")
            event = ZeroCrossing(s_star, fp_star)
            f_end, fp_end = 0.0, fp_star
        else:
            event = Overflow(s_end)
    piece = ProfilePiece(s0, s_end, branch, sign, _dense_evaluator(res.sol),
                         (f_end, fp_end), res.t)
    return piece, event


# -- assembled profiles -----------------------------------------------------


class TailKind(enum.Enum):
    ALGEBRAIC = "algebraic"
    EXPONENTIAL = "exponential"
    TRUNCATED = "truncated"
    SIGN_CHANGE = "sign_change"  # classification outcome only: the continuation has another zero


@dataclass(frozen=True)
class TailClass:
    kind: TailKind
    tail_lambda: float


@dataclass(frozen=True)
class SelfSimilarProfile:
    params: ProblemParams
    pieces: tuple[ProfilePiece, ...]
    zeros: tuple[float, ...]
    zero_derivatives: tuple[float, ...]
    tail: TailClass
    fixed_branch: bool = False

    @property
    def end(self) -> float:
        return self.pieces[-1].b

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([0.0] + list(self.zeros) + [self.end])

    def piece_index(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.clip(np.searchsorted(np.asarray(self.zeros), s, side="right"),
                       0, len(self.pieces) - 1)

    def __call__(self, s):
        """Return ``(f(s), f'(s))``."""
        s_arr = np.asarray(s, dtype=float)
        scalar = s_arr.ndim == 0
        s_arr = np.atleast_1d(s_arr)
        idx = self.piece_index(s_arr)
        f = np.empty_like(s_arr)
        fp = np.empty_like(s_arr)
        for i in np.unique(idx):
            m = idx == i
            f[m], fp[m] = self.pieces[i](s_arr[m])
        if scalar:
            return float(f[0]), float(fp[0])
        return f, fp

    def lam_at(self, s) -> np.ndarray:
        idx = self.piece_index(s)
        return np.array([self.pieces[i].branch.lam for i in idx])

    def second_derivative(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        f, fp = self(s)
        lam = self.lam_at(s)
        N, alpha = self.params.N, self.params.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            f2 = -((N - 1) / s - lam * s / 2) * fp - lam * alpha / 2 * f
        at0 = s == 0
        if at0.any():
            f2[at0] = -lam[at0] * alpha * f[at0] / (2 * N)
        return f2

    def signs(self) -> list[Sign]:
        return [p.sign for p in self.pieces]


def integrate_profile(
    params: ProblemParams,
    *,
    max_zeros: int = 8,
    horizon: Optional[float] = None,
    fixed_branch: bool = False,
    epsilon: float = EPSILON,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> SelfSimilarProfile:
    """Shoot from the origin, switching branch at every zero.

    With ``fixed_branch`` the first branch equation is kept past zeros, which
    reproduces heat-polynomial profiles for even integer ``alpha``.
    """
    if horizon is None:
        horizon = default_horizon(params.N)
    branch = params.origin_sign.branch
    sign = params.origin_sign
    f0, fp0 = series_start_origin(params, epsilon)
    state = (epsilon, f0, fp0)
    pieces: list[ProfilePiece] = []
    zeros: list[float] = []
    zero_d: list[float] = []
    tail_kind = TailKind.TRUNCATED
    while True:
        piece, event = integrate_piece(state, branch, params, horizon, sign=sign,
                                       rtol=rtol, atol=atol)
        if not pieces:
            piece = ProfilePiece(0.0, piece.b, piece.branch, piece.sign,
                                 _origin_piece_evaluator(_SolProxy(piece), params, epsilon),
                                 piece.end_state, piece.steps)
        pieces.append(piece)
        if isinstance(event, ZeroCrossing):
            zeros.append(event.s)
            zero_d.append(event.fp)
            sign = sign.flip()
            if not fixed_branch:
                branch = branch.other()
            if len(zeros) >= max_zeros:
                break
            state = (event.s, 0.0, event.fp)
            continue
        if isinstance(event, Overflow):
            tail_kind = TailKind.EXPONENTIAL
        break
    return SelfSimilarProfile(params, tuple(pieces), tuple(zeros), tuple(zero_d),
                              TailClass(tail_kind, pieces[-1].branch.lam), fixed_branch)


class _SolProxy:
    """Adapts a piece's evaluator to the ``sol(s) -> (2, n)`` convention."""

    def __init__(self, piece: ProfilePiece):
        self._ev = piece.evaluate

    def __call__(self, s):
        f, fp = self._ev(s)
        return np.vstack([np.atleast_1d(f), np.atleast_1d(fp)])


def sample_profile(profile: SelfSimilarProfile, s: Sequence[float]) -> dict[str, np.ndarray]:
    s = np.asarray(s, dtype=float)
    f, fp = profile(s)
    return {"s": s, "f": np.atleast_1d(f), "fp": np.atleast_1d(fp),
            "piece": profile.piece_index(s)}
