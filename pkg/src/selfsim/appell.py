"""Sign-adapted Appell transform between positive and negative homogeneities.

For a profile ``f`` with zeros ``s_1 < ... < s_k`` the kernel profile is
``psi(r) = exp(-int_0^r lam(f(s)) s/2 ds)``, which is ``C_i exp(-lam_i r^2/4)``
on the i-th piece.  The dual profile ``g = psi f`` solves

    g'' + ((N-1)/r + lam r/2) g' + lam (N+alpha)/2 g = 0,   g(0) = f(0), g'(0) = 0,

and belongs to the homogeneity ``-(N + alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .profile_ode import (
    ATOL,
    RTOL,
    ProfilePiece,
    SelfSimilarProfile,
    Sign,
    default_horizon,
)
from .report import Check

__all__ = [
    "Psi",
    "AppellPair",
    "DecayResult",
    "build_psi",
    "appell_transform",
    "inverse_appell",
    "decay_check",
    "nonsign_check",
    "weighted_quotient",
    "dual_residual_max",
    "round_trip_error",
]


@dataclass(frozen=True)
class Psi:
    """Piecewise Gaussian ``C_i exp(-lam_i r^2 / 4)`` split at ``zeros``."""

    zeros: tuple[float, ...]
    lams: tuple[float, ...]
    log_consts: tuple[float, ...]

    @classmethod
    def from_zeros(cls, zeros: Sequence[float], lams: Sequence[float]) -> "Psi":
        logc = [0.0]
        for z, l_prev, l_next in zip(zeros, lams[:-1], lams[1:]):
            logc.append(logc[-1] - (l_prev - l_next) * z * z / 4)
        return cls(tuple(zeros), tuple(lams), tuple(logc))

    def index(self, r) -> np.ndarray:
        return np.searchsorted(np.asarray(self.zeros), np.atleast_1d(r), side="right")

    def log(self, r) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        i = self.index(r)
        return np.take(self.log_consts, i) - np.take(self.lams, i) * r * r / 4

    def __call__(self, r) -> np.ndarray:
        return np.exp(self.log(r))

    def lam(self, r) -> np.ndarray:
        return np.take(self.lams, self.index(r))

    def derivative(self, r) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return -self.lam(r) * r / 2 * self(r)

    def second_derivative(self, r) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        lam = self.lam(r)
        return (lam * lam * r * r / 4 - lam / 2) * self(r)

    def derivative_jump(self, i: int) -> float:
        """``psi'(s_i+) - psi'(s_i-)`` at the i-th zero (0-based)."""
        z = self.zeros[i]
        psi_z = math.exp(self.log_consts[i] - self.lams[i] * z * z / 4)
        return -(self.lams[i + 1] - self.lams[i]) * z * psi_z / 2


def build_psi(profile: SelfSimilarProfile) -> Psi:
    lams = [p.branch.lam for p in profile.pieces]
    return Psi.from_zeros(profile.zeros, lams)


@dataclass(frozen=True)
class AppellPair:
    source: SelfSimilarProfile
    psi: Psi
    beta: float
    ell: float
    zeros: tuple[float, ...]
    signs: tuple[Sign, ...]

    @property
    def alpha(self) -> float:
        return self.source.params.alpha

    @property
    def N(self) -> int:
        return self.source.params.N

    def dual(self, r):
        """Return ``(g(r), g'(r))``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        f, fp = self.source(r)
        psi = self.psi(r)
        return psi * f, self.psi.derivative(r) * f + psi * fp

    def dual_second_derivative(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        f, fp = self.source(r)
        f2 = self.source.second_derivative(r)
        return (self.psi.second_derivative(r) * f + 2 * self.psi.derivative(r) * fp
                + self.psi(r) * f2)

    def dual_residual(self, r) -> np.ndarray:
        """Residual of the dual ODE with the branch coefficients of ``sign(g)``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        g, gp = self.dual(r)
        g2 = self.dual_second_derivative(r)
        lam = self.psi.lam(r)
        N = self.N
        return g2 + ((N - 1) / r + lam * r / 2) * gp + lam * (N + self.alpha) / 2 * g


def appell_transform(profile: SelfSimilarProfile, *, check: bool = True,
                     residual_tol: float = 1e-8) -> AppellPair:
    """Dual profile ``g = psi f`` of homogeneity ``beta = -(N + alpha)``."""
    psi = build_psi(profile)
    N, alpha = profile.params.N, profile.params.alpha
    ell = profile.pieces[-1].branch.lam
    pair = AppellPair(profile, psi, -(N + alpha), ell, tuple(profile.zeros),
                      tuple(p.sign for p in profile.pieces))
    if check:
        r = _sample_away_from_zeros(profile, 400)
        res = np.max(np.abs(pair.dual_residual(r)))
        if not res <= residual_tol:
            raise ArithmeticError(f"dual ODE residual {res:.3e} exceeds {residual_tol:.1e}")
        g0, gp0 = pair.dual(0.0)
        f0, _ = profile(0.0)
        if abs(g0[0] - f0) > 1e-14 or abs(gp0[0]) > 1e-12:
            raise ArithmeticError("dual profile violates g(0) = f(0), g'(0) = 0")
    return pair


def _sample_away_from_zeros(profile: SelfSimilarProfile, n: int, margin: float = 1e-3):
    end = profile.end
    if math.isinf(end):
        end = default_horizon(profile.params.N)
    r = np.linspace(margin, end, n)
    if profile.zeros:
        d = np.min(np.abs(r[:, None] - np.asarray(profile.zeros)[None, :]), axis=1)
        r = r[d > margin]
    return r


def dual_residual_max(pair: AppellPair, n: int = 400) -> float:
    r = _sample_away_from_zeros(pair.source, n)
    return float(np.max(np.abs(pair.dual_residual(r))))


def inverse_appell(pair: AppellPair) -> SelfSimilarProfile:
    """Recover ``f = g / psi_g`` using only the dual data (zeros and signs of ``g``)."""
    lams = [s.branch.lam for s in pair.signs]
    psi = Psi.from_zeros(pair.zeros, lams)
    edges = [0.0] + list(pair.zeros) + [pair.source.end]
    pieces = []
    for i, sign in enumerate(pair.signs):
        def evaluate(s, _psi=psi):
            s_arr = np.asarray(s, dtype=float)
            g, gp = pair.dual(s_arr)
            p = _psi(s_arr)
            f = g / p
            fp = (gp - _psi.derivative(s_arr) * f) / p
            if s_arr.ndim == 0:
                return f[0], fp[0]
            return f, fp

        pieces.append(ProfilePiece(edges[i], edges[i + 1], sign.branch, sign, evaluate))
    src = pair.source
    return SelfSimilarProfile(src.params, tuple(pieces), tuple(pair.zeros),
                              src.zero_derivatives, src.tail)


@dataclass(frozen=True)
class DecayResult:
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    limit: float
    converged: bool
    ratio: float
    far_field: float


def decay_check(pair: AppellPair, grid: Optional[Sequence[float]] = None, *,
                tol: float = 1e-4) -> DecayResult:
    """Sequence ``exp(ell r^2/4) r^-alpha g(r)`` on a tail grid and its limit.

    The limit is extrapolated from the last three grid values assuming
    geometric convergence of the increments; divergence shows up as growing
    increments.
    """
    src = pair.source
    last = src.zeros[-1] if src.zeros else 0.0
    if grid is None:
        if math.isinf(src.end):
            r0 = max(4.0, 2.0 * last)
            grid = r0 * 2.0 ** np.arange(10)
        else:
            lo = max(1.5 * last, last + 0.5)
            hi = src.end * (1 - 1e-9)
            grid = np.geomspace(lo, hi, 7) if hi > lo else np.array([hi])
    r = np.asarray(grid, dtype=float)
    f, _ = src(r)
    # exp(ell r^2/4) psi(r) is the constant C_last on the tail piece
    q = np.exp(pair.ell * r * r / 4 + pair.psi.log(r)) * r ** (-pair.alpha) * np.atleast_1d(f)
    far = float(r[-1] ** (pair.N + pair.alpha) * np.exp(pair.psi.log(r[-1]))[0] * f[-1]) \
        if np.isfinite(f[-1]) else math.inf
    if q.size < 3 or not np.all(np.isfinite(q)):
        return DecayResult(r, q, math.nan, False, math.inf, far)
    d1, d2 = q[-2] - q[-3], q[-1] - q[-2]
    ratio = abs(d2 / d1) if d1 != 0 else 0.0
    if ratio < 1:
        limit = q[-1] + d2 * ratio / (1 - ratio) if d1 != 0 else q[-1]
    else:
        limit = math.nan
    converged = (ratio < 1 and abs(d2) <= tol * max(abs(q[-1]), 1e-300)
                 and limit != 0 and math.isfinite(limit))
    return DecayResult(r, q, float(limit), bool(converged), float(ratio), far)


def nonsign_check(beta: float, N: int, horizon: Optional[float] = None, *,
                  exact_tol: float = 1e-10, rtol: float = RTOL, atol: float = ATOL,
                  samples: int = 2000) -> list[Check]:
    """The positive-branch dual profile with ``g(0) = 1`` keeps its sign for ``-N <= beta < 0``.

    Sign and the comparison ``g > exp(-r^2/4)`` are checked on ``u = exp(r^2/4) g``,
    which solves ``u'' + ((N-1)/r - r/2) u' - (N+beta)/2 u = 0`` and is identically
    1 at ``beta = -N``; in ``g`` itself the Gaussian sinks below round-off long
    before the horizon.  The identity ``g = exp(-r^2/4)`` at ``beta = -N`` is
    checked on ``g`` directly.
    """
    if not -N <= beta < 0:
        raise ValueError(f"beta must lie in [-N, 0), got {beta}")
    if horizon is None:
        horizon = default_horizon(N)
    n1 = N - 1.0
    r = np.linspace(1e-2, horizon, samples)

    # u-form: positive-branch profile equation with alpha = -(N + beta)
    c = (N + beta) / 2
    sol_u = _shoot_radial(lambda s, y: [y[1], -(n1 / s - s / 2) * y[1] + c * y[0]],
                          c / (2 * N), c * (c + 1) / (N * (8 * N + 16)), horizon, rtol, atol)
    checks = [Check(f"beta={beta:.6g}: no sign change up to r={horizon:g}",
                    sol_u.status == 0 and sol_u.t_events[0].size == 0,
                    float(sol_u.t[-1]), float(horizon))]
    if sol_u.status != 0:
        return checks
    if beta != -N:
        u = sol_u.sol(r)[0]
        worst = int(np.argmin(u))
        checks.append(Check(f"beta={beta:.6g}: g > exp(-r^2/4)", bool(np.all(u > 1)),
                            float(u[worst] - 1), 0.0, note=f"min of exp(r^2/4) g - 1 at r={r[worst]:.6g}"))
        return checks

    # g-form, the equation as stated
    sol_g = _shoot_radial(lambda s, y: [y[1], -(n1 / s + s / 2) * y[1] + beta / 2 * y[0]],
                          beta / (4 * N), beta * (beta - 2) / (4 * N * (8 * N + 16)),
                          horizon, rtol, atol, stop_at_zero=False)
    err = float(np.max(np.abs(sol_g.sol(r)[0] - np.exp(-r * r / 4))))
    checks.append(Check("beta=-N: g = exp(-r^2/4)", err <= exact_tol, err, 0.0, exact_tol))
    return checks


def _shoot_radial(fun, a: float, b: float, horizon: float, rtol: float, atol: float, *,
                  stop_at_zero: bool = True, eps: float = 1e-6):
    """Integrate from ``1 + a r^2 + b r^4`` near ``r = 0``, optionally stopping at a zero."""
    y0 = [1 + a * eps**2 + b * eps**4, 2 * a * eps + 4 * b * eps**3]

    def zero(r, y):
        return y[0]

    zero.terminal = stop_at_zero
    return solve_ivp(fun, (eps, horizon), y0, method="DOP853", rtol=rtol, atol=atol,
                     events=[zero], dense_output=True)


def weighted_quotient(q, r: float, N: int, *, panels: int = 200) -> float:
    """``int (q')^2 dmu / int q^2 dmu`` on ``(0, r)`` for ``dmu = s^(N-1) exp(s^2/4) ds``.

    ``q(s)`` returns ``(q, q')``.
    """
    from .spectral import _gl_panels

    nodes, w = _gl_panels(0.0, r, panels)
    qv, qp = q(nodes)
    mu = w * nodes ** (N - 1) * np.exp(nodes * nodes / 4)
    return float(np.dot(mu, qp * qp) / np.dot(mu, qv * qv))


def round_trip_error(pair: AppellPair, r) -> float:
    """Sup over ``r`` of ``|f_rec - f| / max(1, |f|)`` for ``f_rec = inverse_appell(pair)``."""
    r = np.asarray(r, dtype=float)
    f, _ = pair.source(r)
    back, _ = inverse_appell(pair)(r)
    return float(np.max(np.abs(back - f) / np.maximum(1.0, np.abs(f))))
