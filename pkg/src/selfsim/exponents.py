"""Eigen-homogeneities by zero matching.

For a start sign ``sign0`` and ``k`` sign changes, the exponent is the unique
alpha at which the k-th zero of the origin shot coincides with the outermost
zero of the infinity shot whose sign at infinity is ``sign0 * (-1)**k``.  The
matching residual is strictly decreasing in alpha, so a bracketed root finder
applies.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional


from ._roots import BracketExhausted, monotone_root
from .profile_ode import (
    ProblemParams,
    SelfSimilarProfile,
    Sign,
    TailClass,
    TailKind,
    Unsupported,
)
from .shooting import (
    Side,
    ZeroAbsent,
    shoot_infinity,
    shoot_origin,
    zero_or_none,
)

__all__ = [
    "ExponentRecord",
    "ExponentTable",
    "BracketExhausted",
    "tail_sign",
    "matching_residual",
    "solve_alpha",
    "exponent_table",
    "eigen_profile",
]

ALPHA_TOL = 1e-10
RESIDUAL_TOL = 1e-9
SEARCH_SPAN = 50.0


def tail_sign(sign0, k: int) -> Sign:
    sign0 = Sign.parse(sign0)
    return sign0 if k % 2 == 0 else sign0.flip()


@dataclass(frozen=True)
class ExponentRecord:
    k: int
    sign: Sign
    N: int
    alpha: float
    bracket: tuple[float, float]
    residual: float
    ident_check: float
    origin_zeros: tuple[float, ...] = ()
    infinity_zeros: tuple[float, ...] = ()

    @property
    def beta(self) -> float:
        return -(self.N + self.alpha)

    @property
    def tail_sign(self) -> Sign:
        return tail_sign(self.sign, self.k)

    def as_row(self) -> dict:
        return {
            "k": self.k, "sign": self.sign.label, "alpha": self.alpha, "beta": self.beta,
            "residual": self.residual, "ident_check": self.ident_check,
            "bracket_lo": self.bracket[0], "bracket_hi": self.bracket[1],
        }


def matching_residual(alpha: float, sign0, k: int, N: int) -> float:
    """``s^{sign0,k}_alpha`` minus the outermost infinity-shot zero of the tail sign.

    Absent zeros are reported as ``+inf``: an origin zero that does not exist
    has escaped to infinity, an infinity zero that does not exist has not yet
    entered from ``s = 0``.
    """
    sign0 = Sign.parse(sign0)
    s_origin = zero_or_none(alpha, sign0, k, Side.FROM_ORIGIN, N)
    if s_origin is None:
        return math.inf
    s_inf = zero_or_none(alpha, tail_sign(sign0, k), 1, Side.FROM_INFINITY, N)
    if s_inf is None:
        return math.inf
    return s_origin - s_inf


def _ident(alpha: float, sign0: Sign, k: int, N: int):
    prof = shoot_origin(ProblemParams(N, alpha, sign0), max_zeros=max(8, k + 1))
    origin = prof.zeros[:k]
    shot = shoot_infinity(ProblemParams(N, alpha, tail_sign(sign0, k)), tail_sign(sign0, k))
    inner = tuple(sorted(shot.outer_zeros[:k]))
    if len(origin) < k or len(inner) < k:
        return math.inf, origin, tuple(shot.mapped_zeros)
    return (max(abs(a - b) for a, b in zip(origin, inner)), origin,
            tuple(shot.mapped_zeros))


def solve_alpha(k: int, sign0, N: int, *, tol: float = ALPHA_TOL,
                previous: Optional[float] = None) -> ExponentRecord:
    """Exponent ``alpha^{sign0}_k`` by bracketed root finding on the matching residual.

    ``previous`` is ``alpha^{sign0}_{k-1}`` (computed when not given for
    ``k >= 2``); it is the lower end of the search bracket.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    sign0 = Sign.parse(sign0)

    def res(a):
        try:
            return matching_residual(a, sign0, k, N)
        except Unsupported:
            return math.inf

    if k == 1 and sign0 is Sign.PLUS:
        lo = 2.0
        if not res(lo) > 0:
            raise BracketExhausted("residual at alpha=2 is not positive")
        hi = None
        for j in range(40):
            cand = lo + 0.5 * 1.5**j
            if cand > lo + SEARCH_SPAN:
                break
            if res(cand) < 0:
                hi = cand
                break
            lo = cand
    elif k == 1:
        hi = 2.0
        if not res(hi) < 0:
            raise BracketExhausted("residual at alpha=2 is not negative")
        lo = None
        for j in range(1, 60):
            cand = 2.0 / 1.5**j
            if res(cand) > 0:
                lo = cand
                break
            hi = cand
        if lo is None:
            raise BracketExhausted("no positive residual below alpha=2")
    else:
        if previous is None:
            previous = solve_alpha(k - 1, sign0, N, tol=tol).alpha
        lo = previous
        hi = None
        for j in range(40):
            cand = previous + 0.5 * 1.5**j
            if cand > previous + SEARCH_SPAN:
                break
            if res(cand) < 0:
                hi = cand
                break
            lo = cand
    if hi is None:
        raise BracketExhausted(f"no sign change for (k={k}, {sign0.label}, N={N}) "
                               f"within the search span")
    bracket = (lo, hi)
    alpha = monotone_root(res, lo, hi, xtol=tol)
    residual = abs(res(alpha))
    ident, origin, inf_zeros = _ident(alpha, sign0, k, N)
    return ExponentRecord(k, sign0, N, alpha, bracket, residual, ident, origin, inf_zeros)


def _chain(args):
    sign0, K, N, tol = args
    recs, prev = [], None
    for k in range(1, K + 1):
        rec = solve_alpha(k, sign0, N, tol=tol, previous=prev)
        recs.append(rec)
        prev = rec.alpha
    return recs


@dataclass
class ExponentTable:
    N: int
    records: dict = field(default_factory=dict)
    interlacing_margins: dict = field(default_factory=dict)

    def alpha(self, sign, k: int) -> float:
        return self.records[(Sign.parse(sign), k)].alpha

    @property
    def K(self) -> int:
        return max(k for _, k in self.records)

    def rows(self) -> list[ExponentRecord]:
        return [self.records[key] for key in
                sorted(self.records, key=lambda t: (t[1], -int(t[0])))]

    def invariant_checks(self, margin: float = 0.0) -> list[tuple[str, bool, float]]:
        """Ordering properties of the table as ``(name, ok, slack)`` triples."""
        out = []
        K = self.K
        for sg in (Sign.PLUS, Sign.MINUS):
            for k in range(2, K + 1):
                d = self.alpha(sg, k) - self.alpha(sg, k - 1)
                out.append((f"alpha{sg.label}_{k} > alpha{sg.label}_{k-1}", d > margin, d))
        if (Sign.MINUS, 1) in self.records and (Sign.PLUS, 1) in self.records:
            a_m, a_p = self.alpha(Sign.MINUS, 1), self.alpha(Sign.PLUS, 1)
            out.append(("0 < alpha-_1 < 2", 0 < a_m < 2, min(a_m, 2 - a_m)))
            out.append(("alpha+_1 > 2", a_p > 2, a_p - 2))
        for k in range(1, K - 1):
            lo, mid, hi = (self.alpha(Sign.MINUS, k), self.alpha(Sign.PLUS, k + 1),
                           self.alpha(Sign.MINUS, k + 2))
            out.append((f"alpha-_{k} < alpha+_{k+1}", mid - lo > margin, mid - lo))
            out.append((f"alpha+_{k+1} < alpha-_{k+2}", hi - mid > margin, hi - mid))
        for rec in self.records.values():
            out.append((f"beta{rec.sign.label}_{rec.k} < -N", rec.beta < -self.N,
                        -self.N - rec.beta))
        for key, m in self.interlacing_margins.items():
            out.append((f"s+1 < s-2 at alpha+_{key}", m > 0, m))
        return out


def exponent_table(K: int, N: int, *, tol: float = ALPHA_TOL, workers: int = 1,
                   strict: bool = True) -> ExponentTable:
    """All exponents ``k <= K`` for both start signs.

    Each sign is a sequential chain (brackets are seeded by the previous k);
    the two chains run in parallel when ``workers > 1``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    jobs = [(Sign.PLUS, K, N, tol), (Sign.MINUS, K, N, tol)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, 2)) as ex:
            chains = list(ex.map(_chain, jobs))
    else:
        chains = [_chain(j) for j in jobs]
    table = ExponentTable(N)
    for chain in chains:
        for rec in chain:
            table.records[(rec.sign, rec.k)] = rec
    for k in range(2, K + 1):
        a = table.alpha(Sign.PLUS, k)
        s_p1 = zero_or_none(a, Sign.PLUS, 1, Side.FROM_ORIGIN, N)
        s_m2 = zero_or_none(a, Sign.MINUS, 2, Side.FROM_ORIGIN, N)
        table.interlacing_margins[k] = (math.inf if s_m2 is None else s_m2) - s_p1
    if strict:
        bad = [c for c in table.invariant_checks() if not c[1]]
        if bad:
            raise AssertionError(f"exponent table invariants violated: {bad}")
    return table


def eigen_profile(alpha: float, sign0, k: int, N: int) -> SelfSimilarProfile:
    """Glue the origin shot (up to its k-th zero) to the scaled infinity tail.

    The tail is rescaled so that the slopes agree at the shared zero, giving
    a C^1 profile with algebraic growth.
    """
    sign0 = Sign.parse(sign0)
    origin = shoot_origin(ProblemParams(N, alpha, sign0), max_zeros=max(8, k + 1))
    if len(origin.zeros) < k:
        raise ZeroAbsent(f"origin shot has only {len(origin.zeros)} zeros")
    ts = tail_sign(sign0, k)
    shot = shoot_infinity(ProblemParams(N, alpha, ts), ts)
    tail = shot.tail_piece()
    slope_origin = origin.zero_derivatives[k - 1]
    scale = slope_origin / tail.end_state[1]
    if not scale > 0:
        raise ValueError("slopes at the matched zero disagree in sign")
    pieces = origin.pieces[:k] + (tail.scaled(scale),)
    return SelfSimilarProfile(origin.params, pieces, origin.zeros[:k],
                              origin.zero_derivatives[:k],
                              TailClass(TailKind.ALGEBRAIC, ts.branch.lam))


def record_profile(rec: ExponentRecord) -> SelfSimilarProfile:
    return eigen_profile(rec.alpha, rec.sign, rec.k, rec.N)


__all__ += ["record_profile"]


def profile_for_alpha(alpha: float, sign0, N: int, *, matching_tol: float = 1e-7,
                      max_zeros: int = 8) -> tuple[SelfSimilarProfile, Optional[int]]:
    """The profile for a user-supplied ``alpha``, glued to its algebraic tail when matched.

    Returns ``(profile, k)`` where ``k`` is the number of sign changes of a
    matched eigen-profile, or ``(origin shot, None)`` when no zero of the
    origin shot meets the infinity shot within ``matching_tol``.
    """
    sign0 = Sign.parse(sign0)
    origin = shoot_origin(ProblemParams(N, alpha, sign0), max_zeros=max_zeros)
    for k in range(1, len(origin.zeros) + 1):
        try:
            r = matching_residual(alpha, sign0, k, N)
        except Unsupported:
            break
        if abs(r) <= matching_tol:
            return eigen_profile(alpha, sign0, k, N), k
    return origin, None


__all__ += ["profile_for_alpha"]
