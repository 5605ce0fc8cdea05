"""Gaussian-weighted Sturm-Liouville problems behind the profile equation.

On a piece where ``f`` keeps a sign the profile equation is the eigenproblem

    -(w f')' = Lam * w f,   w(s) = s^(N-1) exp(-lam s^2 / 4),

with ``Lam = lam * alpha / 2``: ``alpha/2`` for the measure ``mu+`` (``lam = 1``)
and ``alpha`` for ``mu-`` (``lam = 2``).  This module provides Rayleigh quotients
by Gauss-Legendre quadrature and an independent finite-volume eigen-oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .profile_ode import ProblemParams, SelfSimilarProfile, Sign, TailKind, default_horizon
from .report import Check, close
from .shooting import Side, shoot_origin, zero_or_none

__all__ = [
    "Measure",
    "EigenResult",
    "weight",
    "integrate",
    "rayleigh",
    "discrete_min_eigenvalue",
    "verify_minimal_eigenvalue",
]

GL_ORDER = 8


class Measure(enum.Enum):
    MU_PLUS = "mu+"
    MU_MINUS = "mu-"

    @property
    def lam(self) -> float:
        return 1.0 if self is Measure.MU_PLUS else 2.0

    @classmethod
    def for_sign(cls, sign) -> "Measure":
        return cls.MU_PLUS if Sign.parse(sign) is Sign.PLUS else cls.MU_MINUS

    def to_alpha(self, lam_min: float) -> float:
        return 2.0 * lam_min if self is Measure.MU_PLUS else lam_min


def weight(s, kind: Measure, N: int):
    s = np.asarray(s, dtype=float)
    return s ** (N - 1) * np.exp(-kind.lam * s * s / 4)


def _tail_cutoff(a: float, kind: Measure) -> float:
    # exp(-lam s^2/4) has dropped below e^-400 well before this point
    return max(a, 0.0) + 40.0 / math.sqrt(kind.lam)


def _gl_panels(a: float, b: float, panels: int):
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(func: Callable, a: float, b: float, *, panels: int = 200) -> float:
    """Composite Gauss-Legendre quadrature of ``func`` on ``[a, b]``."""
    nodes, weights = _gl_panels(a, b, panels)
    return float(np.dot(weights, func(nodes)))


def rayleigh(func: Callable, interval: tuple[float, float], kind: Measure, N: int, *,
             panels: int = 400) -> float:
    """Weighted Rayleigh quotient ``int f'^2 dmu / int f^2 dmu`` on ``interval``.

    ``func(s)`` returns ``(f, f')``; an infinite right end is truncated where the
    Gaussian weight is negligible.
    """
    a, b = interval
    if math.isinf(b):
        b = _tail_cutoff(a, kind)
    nodes, qw = _gl_panels(a, b, panels)
    f, fp = func(nodes)
    f = np.broadcast_to(np.asarray(f, dtype=float), nodes.shape)
    fp = np.broadcast_to(np.asarray(fp, dtype=float), nodes.shape)
    wq = qw * weight(nodes, kind, N)
    den = float(np.dot(wq, f * f))
    if den == 0.0:
        raise ZeroDivisionError("Rayleigh quotient of the zero function")
    return float(np.dot(wq, fp * fp)) / den


@dataclass(frozen=True)
class EigenResult:
    interval: tuple[float, float]
    kind: Measure
    N: int
    grid_points: int
    lambda_min: float
    nodes: np.ndarray = field(repr=False)
    eigenvector: np.ndarray = field(repr=False)
    truncation_bound: float = 0.0

    @property
    def recovered_alpha(self) -> float:
        return self.kind.to_alpha(self.lambda_min)

    def sign_changes(self) -> int:
        v = self.eigenvector[np.abs(self.eigenvector) > 1e-14 * np.abs(self.eigenvector).max()]
        return int(np.count_nonzero(np.diff(np.sign(v))))


def discrete_min_eigenvalue(interval: tuple[float, float], kind: Measure, N: int,
                            grid_points: int = 10_000, *,
                            cutoff: Optional[float] = None) -> EigenResult:
    """Smallest eigenvalue of ``-(w f')' = Lam w f`` by a vertex-centred finite-volume scheme.

    Dirichlet conditions at finite nonzero ends, zero flux at ``s = 0``.  An
    infinite right end is replaced by a Dirichlet cap at ``cutoff`` (default: the
    profile horizon), and the Gaussian weight mass beyond it is reported as
    ``truncation_bound``.
    """
    if grid_points < 100:
        raise ValueError("grid_points must be >= 100")
    a, b = map(float, interval)
    trunc = 0.0
    if math.isinf(b):
        b = default_horizon(N) if cutoff is None else cutoff
        tail_nodes, tail_w = _gl_panels(b, _tail_cutoff(b, kind), 50)
        trunc = float(np.dot(tail_w, weight(tail_nodes, kind, N)))
    if not 0 <= a < b:
        raise ValueError("need 0 <= a < b")
    n = int(grid_points)
    h = (b - a) / n
    s = a + h * np.arange(n + 1)
    w_half = weight(s[:-1] + h / 2, kind, N)        # w at i+1/2, i = 0..n-1
    first = 0 if a == 0 else 1
    idx = np.arange(first, n)                        # unknowns; s_n is Dirichlet
    diag = np.empty(idx.size)
    mass = np.empty(idx.size)
    # interior rows
    inner = idx >= 1
    ii = idx[inner]
    diag[inner] = (w_half[ii - 1] + w_half[ii]) / h
    mass[inner] = h * weight(s[ii], kind, N)
    if first == 0:
        diag[0] = w_half[0] / h
        x, q = np.polynomial.legendre.leggauss(GL_ORDER)
        nodes = h / 4 * (x + 1)
        mass[0] = float(np.dot(h / 4 * q, weight(nodes, kind, N)))
    off = -w_half[idx[:-1]] / h
    r = 1.0 / np.sqrt(mass)
    d = diag * r * r
    e = off * r[:-1] * r[1:]
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    if not np.isfinite(vals[0]):
        raise ArithmeticError("eigenvalue iteration did not converge")
    v = vecs[:, 0] * r
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    # Sturm bisection is only accurate to eps*|T| ~ eps/h^2; the discrete
    # Rayleigh quotient in flux-difference form is accurate to eps*lam.
    full = np.zeros(n + 1)
    full[idx] = v
    energy = np.dot(w_half, np.diff(full) ** 2) / h
    lam_min = float(energy / np.dot(mass, v * v))
    return EigenResult((a, float(interval[1])), kind, N, n, lam_min, s[idx], v, trunc)


def _piece_interval(profile: SelfSimilarProfile, i: int) -> Optional[tuple[float, float]]:
    bp = [0.0] + list(profile.zeros)
    a = bp[i]
    if i < len(profile.zeros):
        return a, profile.zeros[i]
    if profile.tail.kind is TailKind.ALGEBRAIC:
        return a, math.inf
    return None


def verify_minimal_eigenvalue(profile: SelfSimilarProfile, alpha: Optional[float] = None, *,
                              tol: float = 1e-5, eig_tol: float = 1e-3,
                              grid_points: int = 10_000, nested_step: float = 0.25) -> list[Check]:
    """Rayleigh identities per piece, the first-piece eigen-oracle and a nested-interval replay.

    ``alpha`` is the homogeneity claimed for the profile (default: its own).
    Pieces whose right end is neither a zero nor an algebraic tail are skipped.
    """
    N = profile.params.N
    claimed = profile.params.alpha if alpha is None else float(alpha)
    checks: list[Check] = []
    for i, piece in enumerate(profile.pieces):
        iv = _piece_interval(profile, i)
        if iv is None:
            continue
        kind = Measure.for_sign(piece.sign)
        R = rayleigh(piece.evaluate, iv, kind, N)
        expected = claimed / 2 if kind is Measure.MU_PLUS else claimed
        checks.append(close(f"Rayleigh {kind.value} on piece {i} {iv[0]:.6g}..{iv[1]:.6g}",
                            R, expected, tol))
    if profile.zeros:
        kind = Measure.for_sign(profile.pieces[0].sign)
        res = discrete_min_eigenvalue((0.0, profile.zeros[0]), kind, N, grid_points)
        checks.append(close("discrete minimal eigenvalue on (0, s1)", res.recovered_alpha,
                            claimed, eig_tol))
        checks.append(Check("ground state has no interior sign change",
                            res.sign_changes() == 0, float(res.sign_changes()), 0.0))
    checks.extend(_nested_replay(profile.params, nested_step, tol))
    return checks


def _nested_replay(params: ProblemParams, step: float, tol: float) -> list[Check]:
    """Two homogeneities a1 < a2: the later interval between zeros is not nested in the earlier."""
    N, sign = params.N, params.origin_sign
    a1, a2 = params.alpha, params.alpha + step
    use_second = all(zero_or_none(a, sign, 2, Side.FROM_ORIGIN, N) is not None for a in (a1, a2))
    out = []
    ends = []
    for a in (a1, a2):
        prof = shoot_origin(ProblemParams(N, a, sign))
        if use_second:
            iv, piece = (prof.zeros[0], prof.zeros[1]), prof.pieces[1]
        else:
            iv, piece = (0.0, prof.zeros[0]), prof.pieces[0]
        kind = Measure.for_sign(piece.sign)
        R = rayleigh(piece.evaluate, iv, kind, N)
        expected = a / 2 if kind is Measure.MU_PLUS else a
        out.append(close(f"nested replay: Rayleigh at alpha={a:.6g}", R, expected, tol))
        ends.append(iv[1])
    label = "s2" if use_second else "s1"
    out.append(Check(f"nested replay: {label} strictly decreasing in alpha", ends[1] < ends[0],
                     ends[0] - ends[1], 0.0))
    return out
