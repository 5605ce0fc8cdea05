"""Radial finite-difference evolution of beta(w)_t = Laplace(w), beta(r) = 2r - r^+.

The scheme advances the enthalpy ``v = beta(w)`` explicitly,
``v <- v + dt * Lap_h w`` with ``w = v`` where ``v > 0`` and ``w = v/2`` where
``v < 0``; away from the zero set this is ``w_t = gamma(w) Lap w`` with
``gamma`` in ``{1, 1/2}``.  Boundary values at ``r = R`` are Dirichlet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .profile_ode import SelfSimilarProfile
from .report import Check, close

__all__ = [
    "RadialGrid",
    "EvolutionState",
    "Trajectory",
    "Unstable",
    "radial_laplacian",
    "evolve",
    "evolve_profile",
    "default_radius",
    "staged_center_trace",
    "lipschitz_demo",
    "LipschitzReport",
    "caloric_quadratic",
    "heat_quartic",
    "calibration_error",
    "calibration_checks",
    "self_similarity_checks",
    "lipschitz_checks",
]

CFL = 0.9


class Unstable(ArithmeticError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    h: float
    R: float
    N: int

    def __post_init__(self):
        if not (self.h > 0 and self.R > self.h and self.N >= 1):
            raise ValueError("need h > 0, R > h, N >= 1")
        # the outer node is the Dirichlet node, so R must sit on the grid
        object.__setattr__(self, "R", self.h * round(self.R / self.h))

    @property
    def n(self) -> int:
        return int(round(self.R / self.h))

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(self.n + 1)

    def max_dt(self) -> float:
        return self.h * self.h / (2 * self.N)


@dataclass
class EvolutionState:
    t: float
    w: np.ndarray = field(repr=False)
    dt: float


def radial_laplacian(w: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Discrete radial Laplacian at nodes ``0..n-1`` (the last node is boundary)."""
    h, N = grid.h, grid.N
    out = np.empty(w.size - 1)
    out[0] = 2 * N * (w[1] - w[0]) / (h * h)
    r = h * np.arange(1, w.size - 1)
    out[1:] = ((w[2:] - 2 * w[1:-1] + w[:-2]) / (h * h)
               + (N - 1) / r * (w[2:] - w[:-2]) / (2 * h))
    return out


class _StencilLaplacian:
    """Same stencil as :func:`radial_laplacian` with precomputed coefficients."""

    def __init__(self, grid: RadialGrid):
        h, N, n = grid.h, grid.N, grid.n
        r = h * np.arange(1, n)
        self.lo = 1 / (h * h) - (N - 1) / (2 * h * r)
        self.hi = 1 / (h * h) + (N - 1) / (2 * h * r)
        self.c0 = 2 * N / (h * h)
        self.mid = 2 / (h * h)
        self.out = np.empty(n)

    def __call__(self, w):
        out = self.out
        out[0] = self.c0 * (w[1] - w[0])
        np.multiply(self.hi, w[2:], out=out[1:])
        out[1:] += self.lo * w[:-2]
        out[1:] -= self.mid * w[1:-1]
        return out


def _beta(w):
    return np.where(w > 0, w, 2 * w)


def _beta_inv(v):
    return np.where(v > 0, v, 0.5 * v)


def _sign_changes(w: np.ndarray) -> int:
    s = np.sign(w[w != 0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass
class Trajectory:
    """Centre trace ``(t, w(0, t))`` with the sign-change count at each record."""

    t: np.ndarray
    w0: np.ndarray
    sign_changes: np.ndarray
    final: Optional[EvolutionState] = field(default=None, repr=False)

    def ratio(self, alpha: float, f0: float) -> np.ndarray:
        return self.w0 / (f0 * (-self.t) ** (alpha / 2))

    def at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"time {t} was not recorded")
        return float(self.w0[i])


def evolve(w_init: np.ndarray, grid: RadialGrid, t_start: float, t_end: float,
           boundary: Callable[[float], float], *, record_times: Sequence[float] = (),
           samples: int = 200, cfl: float = CFL, growth_limit: float = 10.0) -> Trajectory:
    """Explicit enthalpy stepping from ``t_start`` to ``t_end``.

    Records the centre value at ``samples`` uniform times and at every entry of
    ``record_times`` (hit exactly by shortening the step).
    """
    if not t_end > t_start:
        raise ValueError("t_end must exceed t_start")
    if not 0 < cfl <= 1:
        raise ValueError("cfl must lie in (0, 1]")
    w = np.array(w_init, dtype=float)
    if w.size != grid.n + 1:
        raise ValueError("initial data does not match the grid")
    dt = cfl * grid.max_dt()
    stops = sorted({float(t) for t in record_times if t_start < t <= t_end}
                   | set(np.linspace(t_start, t_end, samples + 1)[1:].tolist()))
    bound = growth_limit * max(np.max(np.abs(w)), 1e-300)
    lap = _StencilLaplacian(grid)
    v = _beta(w)
    t = t_start
    ts, w0s, scs = [t], [w[0]], [_sign_changes(w)]
    for stop in stops:
        while t < stop:
            step = min(dt, stop - t)
            if stop - (t + step) < 1e-3 * dt:
                step = stop - t
            v[:-1] += step * lap(w)
            t = stop if step == stop - t else t + step
            b = boundary(t)
            v[-1] = b if b > 0 else 2 * b
            np.maximum(v, 0.0, out=w)
            w += 0.5 * np.minimum(v, 0.0)
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > bound:
            raise Unstable(f"max-norm growth beyond {growth_limit}x at t={t:.6g}")
        ts.append(t)
        w0s.append(w[0])
        scs.append(_sign_changes(w))
    return Trajectory(np.array(ts), np.array(w0s), np.array(scs), EvolutionState(t, w, dt))


def _selfsimilar(profile: SelfSimilarProfile, alpha: float):
    def value(r, t):
        tau = -t
        f, _ = profile(np.asarray(r, dtype=float) / math.sqrt(tau))
        return tau ** (alpha / 2) * f
    return value


def _edge(ext, R: float, t: float) -> float:
    return float(np.atleast_1d(ext(R, t))[0])


def _tabulated(ext, R: float, t0: float, t1: float, n: int = 4000):
    """Boundary trace ``ext(R, t)`` on ``[t0, t1]`` as a spline in ``log(-t)``."""
    x = np.linspace(math.log(-t0), math.log(-t1), n)
    tau = np.exp(x)
    vals = np.array([_edge(ext, R, -a) for a in tau])
    spline = CubicSpline(x[::-1], vals[::-1])
    return lambda t: float(spline(math.log(-t)))


def default_radius(profile: SelfSimilarProfile, t_span: float = 1.0) -> float:
    z = profile.zeros[-1] if profile.zeros else 1.0
    return max(3.0 * math.sqrt(t_span) * z, 3.0)


def evolve_profile(profile: SelfSimilarProfile, t_end: float, h: float, *,
                   R: Optional[float] = None, boundary: str = "selfsimilar",
                   record_times: Sequence[float] = (), samples: int = 200,
                   cfl: float = CFL) -> Trajectory:
    """Evolve ``w(r, -1) = f(r)`` to ``t_end``.

    ``boundary`` is ``"selfsimilar"`` (the extension ``(-t)^(alpha/2) f(R/sqrt(-t))``)
    or ``"frozen"`` (the initial boundary value).
    """
    if not -1 < t_end < 0:
        raise ValueError("t_end must lie in (-1, 0)")
    N, alpha = profile.params.N, profile.params.alpha
    grid = RadialGrid(h, R if R is not None else default_radius(profile), N)
    r = grid.nodes
    w0 = np.asarray(profile(r)[0], dtype=float)
    if boundary == "selfsimilar":
        ext = _selfsimilar(profile, alpha)
        bc = _tabulated(ext, grid.R, -1.0, t_end)
    elif boundary == "frozen":
        frozen = float(w0[-1])
        bc = lambda t: frozen
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    return evolve(w0, grid, -1.0, t_end, bc, record_times=record_times, samples=samples, cfl=cfl)


def staged_center_trace(profile: SelfSimilarProfile, taus: Sequence[float], h: float, *,
                        R: Optional[float] = None, cfl: float = CFL) -> Trajectory:
    """Centre values at ``t = -tau`` for small ``tau``, remeshing as the core shrinks.

    Each time ``-t`` drops by a factor 4 the solution is interpolated onto a grid
    with half the spacing and half the radius, so the resolution of the
    shrinking core stays fixed.  Boundary values come from the self-similar
    extension.
    """
    N, alpha = profile.params.N, profile.params.alpha
    ext = _selfsimilar(profile, alpha)
    taus = sorted((float(x) for x in taus), reverse=True)
    R = R if R is not None else default_radius(profile)
    grid = RadialGrid(h, R, N)
    w = np.asarray(profile(grid.nodes)[0], dtype=float)
    t = -1.0
    ts, w0s, scs = [], [], []
    stage_end = -0.25
    while True:
        targets = [-x for x in taus if t < -x <= stage_end]
        gR = grid.R
        tr = evolve(w, grid, t, stage_end, _tabulated(ext, gR, t, stage_end, 1000),
                    record_times=targets, samples=1, cfl=cfl)
        for x in targets:
            ts.append(x)
            w0s.append(tr.at(x))
            i = int(np.argmin(np.abs(tr.t - x)))
            scs.append(tr.sign_changes[i])
        t = stage_end
        if -t <= taus[-1] * (1 + 1e-12):
            break
        old = grid
        grid = RadialGrid(old.h / 2, old.R / 2, N)
        spline = CubicSpline(old.nodes, tr.final.w, bc_type=((1, 0.0), "not-a-knot"))
        w = spline(grid.nodes)
        w[-1] = _edge(ext, grid.R, t)
        stage_end = t / 4
    order = np.argsort(ts)
    return Trajectory(np.array(ts)[order], np.array(w0s)[order], np.array(scs)[order])


@dataclass(frozen=True)
class LipschitzReport:
    taus: np.ndarray
    quotients: np.ndarray
    slope: float
    expected_slope: float

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.expected_slope) / abs(self.expected_slope)

    @property
    def bounded(self) -> bool:
        """Quotients do not grow as ``tau`` decreases."""
        q = self.quotients[np.argsort(-self.taus)]
        return bool(np.all(np.diff(q) <= 1e-12 * np.max(q)))

    def rows(self):
        return list(zip(self.taus.tolist(), self.quotients.tolist()))


def lipschitz_demo(trajectory: Trajectory, alpha: float,
                   taus: Optional[Sequence[float]] = None) -> LipschitzReport:
    """Difference quotients ``|w(0,-tau) - w(0,0-)| / tau`` with ``w(0,0-) = 0``.

    The log-log slope is fitted by least squares and compared with
    ``alpha/2 - 1``.
    """
    if taus is None:
        taus = 2.0 ** -np.arange(1, 11)
    taus = np.asarray(taus, dtype=float)
    vals = np.array([trajectory.at(-x) for x in taus])
    q = np.abs(vals) / taus
    slope = float(np.polyfit(np.log(taus), np.log(q), 1)[0])
    return LipschitzReport(taus, q, slope, alpha / 2 - 1)


def caloric_quadratic(N: int):
    """``t + r^2/(2N) + 2``: positive on ``t >= -1`` and exact for the stencil."""
    return lambda r, t: t + np.asarray(r) ** 2 / (2 * N) + 2.0


def heat_quartic(N: int):
    """Radial heat polynomial ``r^4 + 4(N+2) t r^2 + 4N(N+2) t^2`` shifted to stay positive on ``t >= -1``."""
    shift = 8 * (N + 2) + 1.0

    def w(r, t):
        r2 = np.asarray(r) ** 2
        return r2 * r2 + 4 * (N + 2) * t * r2 + 4 * N * (N + 2) * t * t + shift
    return w


def calibration_error(exact, N: int, h: float, *, R: float = 2.0, t_end: float = -0.5,
                      cfl: float = CFL) -> float:
    """Max nodal error at ``t_end`` when evolving the exact caloric ``exact(r, t)`` from ``t = -1``."""
    grid = RadialGrid(h, R, N)
    r = grid.nodes
    tr = evolve(exact(r, -1.0), grid, -1.0, t_end, lambda t: float(exact(R, t)),
                samples=1, cfl=cfl)
    return float(np.max(np.abs(tr.final.w - exact(r, t_end))))


def calibration_checks(N: int, h: float = 1 / 40) -> list[Check]:
    e_quad = calibration_error(caloric_quadratic(N), N, h)
    e1 = calibration_error(heat_quartic(N), N, h)
    e2 = calibration_error(heat_quartic(N), N, h / 2)
    return [
        Check(f"caloric quadratic N={N}: error <= h^2", e_quad <= h * h, e_quad, 0.0, h * h),
        close(f"heat quartic N={N}: refinement ratio", e1 / e2, 4.0, 0.5),
    ]


def self_similarity_checks(N: int = 1, h: float = 1 / 400, t_end: float = -0.05, *,
                           ratio_tol: float = 0.02, control_shift: float = 0.1) -> list[Check]:
    """Evolve the first minus eigen-profile and a non-eigen control.

    The control starts from the origin shot at ``alpha + control_shift``; its
    outer boundary value is frozen, which is what an algebraic tail
    ``C s^alpha`` would prescribe at a fixed radius.
    """
    from .exponents import record_profile, solve_alpha
    from .profile_ode import ProblemParams, Sign
    from .shooting import shoot_origin

    rec = solve_alpha(1, Sign.MINUS, N)
    prof = record_profile(rec)
    tr = evolve_profile(prof, t_end, h)
    dev = float(np.max(np.abs(tr.ratio(rec.alpha, prof(0.0)[0]) - 1)))
    checks = [
        Check(f"alpha-_1 self-similar ratio within {ratio_tol:.0%} on [-1, {t_end}] (h={h:.4g})",
              dev <= ratio_tol, dev, 0.0, ratio_tol),
        Check("sign changes of w(., t) stay equal to k = 1",
              bool(np.all(tr.sign_changes == 1)), float(np.max(tr.sign_changes)), 1.0),
    ]
    a_ctl = rec.alpha + control_shift
    ctl = shoot_origin(ProblemParams(N, a_ctl, Sign.MINUS))
    tc = evolve_profile(ctl, t_end, h, boundary="frozen")
    drift = float(abs(tc.ratio(a_ctl, ctl(0.0)[0])[-1] - 1))
    checks.append(Check("non-eigen control drifts beyond the eigen-run deviation",
                        drift > 10 * dev, drift, dev,
                        note=f"control alpha={a_ctl:.6g}"))
    return checks


def lipschitz_checks(N: int = 1, h: float = 1 / 200, *, slope_tol: float = 0.05) -> list[Check]:
    """Difference quotients at the centre for the first minus and plus eigen-profiles."""
    from .exponents import record_profile, solve_alpha
    from .profile_ode import Sign

    taus = 2.0 ** -np.arange(1, 11)
    out = []
    rec = solve_alpha(1, Sign.MINUS, N)
    rep = lipschitz_demo(staged_center_trace(record_profile(rec), taus, h), rec.alpha, taus)
    out.append(close("alpha-_1 quotient slope vs alpha/2 - 1", rep.slope, rep.expected_slope,
                     slope_tol, rel=True))
    out.append(Check("alpha-_1 quotients unbounded (grow as tau halves)",
                     bool(np.all(np.diff(rep.quotients) > 0)), float(rep.quotients[-1])))
    rec = solve_alpha(1, Sign.PLUS, N)
    rep = lipschitz_demo(staged_center_trace(record_profile(rec), taus, h), rec.alpha, taus)
    out.append(Check("alpha+_1 quotients bounded", rep.bounded, float(np.max(rep.quotients)),
                     note=f"slope={rep.slope:.6g}"))
    return out
