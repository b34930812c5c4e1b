"""Real-eigenvalue location, the closed-form equal-velocity spectrum, and
a Chebyshev collocation cross-check.

The dominant eigenvalue is the largest real root of Delta(lambda); it lives
in [-M0, 0) where M0 is an explicit bracket derived from the port
velocities.  Delta is extremely steep near that root (slopes beyond 1e6),
so roots are located by sign changes on a geometric grid accumulating at
0- and refined by bisection on interval width, never on |Delta|.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .charfun import delta_sign_log, return_map
from .errors import (EigSolverFailure, LimitCaseHasNoBracket, NotLimitCase,
                     NoSignChangeFound, ValidationError)
from .params import ModelParams


@dataclass(frozen=True)
class BracketBudget:
    """Lower bracket -M0 for the dominant eigenvalue, with the positive
    quantity Q0 appearing in its derivation."""

    M0: float
    Q0: float
    v_min: float
    v_max: float


def bracket_bound(params: ModelParams) -> BracketBudget:
    """Explicit 0 < M0 < R with the dominant eigenvalue in [-M0, 0)."""
    if params.limit_case:
        raise LimitCaseHasNoBracket(
            "equal velocities: the dominant eigenvalue is 0 exactly")
    v_min, v_max = min(params.v), max(params.v)
    R, P = params.R, params.P
    denom = v_min * (v_max - v_min) / 2.0 + v_max * (R * P * P + 1.0)
    M0 = R - R * R * P * P * v_min / denom
    Q0 = denom / (R * P)
    return BracketBudget(M0=M0, Q0=Q0, v_min=v_min, v_max=v_max)


def _signs(grid, params: ModelParams, threads: int = 1):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda x: delta_sign_log(x, params)[0], grid))
    return [delta_sign_log(x, params)[0] for x in grid]


def threads_from_env() -> int:
    """Worker count for grid scans, from TMB_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("TMB_THREADS", "1")))
    except ValueError:
        return 1


def refine_bracket(lo: float, hi: float, params: ModelParams,
                   tol: float) -> float:
    """Bisection on a sign-change bracket; stops on interval width."""
    slo = delta_sign_log(lo, params)[0]
    for _ in range(300):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        smid = delta_sign_log(mid, params)[0]
        if smid == 0:
            return mid
        if smid == slo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dominant_eigenvalue(params: ModelParams, tol: float = 1e-10,
                        threads: int = 1) -> float:
    """Largest real root of Delta in [-M0, 0).

    Scans a 200-point geometric grid from -tol toward -M0 (the root hugs 0
    while Delta stays nearly flat over most of the bracket), densifies the
    first sign-change cell tenfold, then bisects to |interval| < tol.
    """
    if tol <= 0.0:
        raise ValidationError(f"tol must be positive, got {tol}")
    bb = bracket_bound(params)  # rejects the equal-velocity case
    if tol >= bb.M0:
        raise ValidationError(f"tol={tol} exceeds bracket width M0={bb.M0}")
    grid = -np.geomspace(tol, bb.M0, 200)
    signs = _signs(grid, params, threads)
    for i in range(len(grid) - 1):
        if signs[i] == 0:
            return float(grid[i])
        if signs[i] * signs[i + 1] < 0:
            sub = -np.geomspace(-grid[i], -grid[i + 1], 21)
            ssub = _signs(sub, params, threads)
            for j in range(len(sub) - 1):
                if ssub[j] == 0:
                    return float(sub[j])
                if ssub[j] * ssub[j + 1] < 0:
                    return refine_bracket(float(sub[j + 1]), float(sub[j]),
                                          params, tol)
    raise NoSignChangeFound(
        f"no sign change of Delta on 200-point geometric grid in "
        f"[{-bb.M0}, {-tol}]; sign at {-tol} is {signs[0]}, "
        f"at {-bb.M0} is {signs[-1]}")


def real_root_scan(params: ModelParams, range_: tuple, grid_n: int = 400,
                   tol: float = 1e-12, threads: int = 1,
                   with_brackets: bool = False) -> list:
    """All sign-change-bracketed real roots of Delta on [lo, hi].

    Returns floats, or (root, bracket_lo, bracket_hi) triples when
    with_brackets is set.
    """
    lo, hi = range_
    if lo > hi:
        raise ValidationError(f"bad range [{lo}, {hi}]")
    if lo == hi or grid_n < 2:
        return []
    grid = np.linspace(lo, hi, grid_n)
    signs = _signs(grid, params, threads)
    found = []
    for i in range(len(grid) - 1):
        if signs[i] == 0:
            found.append((float(grid[i]), float(grid[i]), float(grid[i])))
        elif signs[i] * signs[i + 1] < 0:
            width = tol * max(1.0, abs(grid[i]))
            root = refine_bracket(float(grid[i]), float(grid[i + 1]),
                                  params, width)
            found.append((root, float(grid[i]), float(grid[i + 1])))
    if signs and signs[-1] == 0:
        found.append((float(grid[-1]), float(grid[-1]), float(grid[-1])))
    if with_brackets:
        return found
    return [f[0] for f in found]


# ---------------------------------------------------------------------------
# Equal-velocity (limit) closed-form spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitSpectrum:
    """One index k of the equal-velocity spectrum: the pair lambda_k^+/-."""

    k: int
    lambda_plus: complex
    lambda_minus: complex
    X: float
    Y: float
    U: float
    V: float


def _require_limit(params: ModelParams):
    if not params.limit_case:
        raise NotLimitCase(f"velocities {params.v} are not all equal")


def _uv_from_xy(X: float, Y: float) -> tuple:
    """U = sqrt((hypot(X,Y)+X)/2), V = sign(Y) sqrt((hypot(X,Y)-X)/2),
    evaluated without subtractive cancellation on either side of X=0."""
    hyp = math.hypot(X, Y)
    if X >= 0.0:
        U = math.sqrt((hyp + X) / 2.0)
        V = 0.0 if Y == 0.0 else math.copysign(abs(Y) / (2.0 * U), Y)
    else:
        W = math.sqrt((hyp - X) / 2.0)
        U = 0.0 if Y == 0.0 else abs(Y) / (2.0 * W)
        V = 0.0 if Y == 0.0 else math.copysign(W, Y)
    return U, V


def limit_point(params: ModelParams, k: int) -> LimitSpectrum:
    """lambda_k^+/- for one integer index k (equal velocities)."""
    _require_limit(params)
    v, R, P = params.v1, params.R, params.P
    A = R * (1.0 + P * P)
    B = math.pi * k * (v - 1.0) / 2.0
    X = -math.pi ** 2 * k * k * (v + 1.0) ** 2 / 4.0 + R * R * (1.0 + P * P) ** 2
    Y = math.pi * R * (P * P - 1.0) * (v + 1.0) * k
    U, V = _uv_from_xy(X, Y)
    lam_p = complex((-A + U) / 2.0, (-B + V) / 2.0)
    lam_m = complex((-A - U) / 2.0, (-B - V) / 2.0)
    return LimitSpectrum(k=k, lambda_plus=lam_p, lambda_minus=lam_m,
                         X=X, Y=Y, U=U, V=V)


def limit_spectrum(params: ModelParams, k_max: int = 80) -> list:
    """The closed-form spectrum for k = -k_max .. k_max."""
    _require_limit(params)
    return [limit_point(params, k) for k in range(-k_max, k_max + 1)]


def limit_asymptote(params: ModelParams, k: int) -> tuple:
    """Large-|k| expansion of (lambda_k^+, lambda_k^-) through the k^-2
    real and k^-1 imaginary corrections."""
    _require_limit(params)
    if k == 0:
        raise ValidationError("asymptote is defined for k != 0")
    v, R, P = params.v1, params.R, params.P
    c1 = 2.0 * R * R * P * P / (math.pi * (v + 1.0))
    c2 = 4.0 * R ** 3 * (P * P - 1.0) * P * P / (math.pi ** 2 * (v + 1.0) ** 2)
    slow = complex(-R + c2 / k ** 2, math.pi * k / 2.0 - c1 / k)
    fast = complex(-R * P * P - c2 / k ** 2, -math.pi * v * k / 2.0 + c1 / k)
    if P >= 1.0:
        return slow, fast
    return fast, slow


def imaginary_vanishing_k(params: ModelParams):
    """The real index k* where Im(lambda_k) would vanish, if it exists.

    Returns None when the radicand is non-positive (the usual situation)
    or when v = 1 (the formula degenerates).  A nearly integer k* signals
    an eigenvalue crossing the real axis.
    """
    _require_limit(params)
    v, R, P = params.v1, params.R, params.P
    if v == 1.0:
        return None
    radicand = 2.0 * (P * P * v * v - (P ** 4 + 1.0) * v + P * P) / v
    if radicand <= 0.0:
        return None
    return 2.0 * R / (math.pi * (v - 1.0)) * math.sqrt(radicand)


def limit_residual(lam, params: ModelParams) -> float:
    """Scale-normalized |Delta(lambda)| for plugging closed-form
    eigenvalues back into the characteristic function."""
    _require_limit(params)
    z, _ = return_map(lam, params)._delta_parts
    return abs(z)


# ---------------------------------------------------------------------------
# Chebyshev collocation cross-check
# ---------------------------------------------------------------------------

def _cheb(N: int) -> tuple:
    """Chebyshev differentiation matrix and nodes x_j = cos(j pi / N)."""
    if N == 0:
        return np.zeros((1, 1)), np.array([1.0])
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1.0) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def collocation_spectrum(params: ModelParams, N: int = 30) -> np.ndarray:
    """Discrete spectrum of the transport operator on the four zones.

    Per zone, both components are collocated on N+1 Chebyshev points
    (mapped so node index runs left to right in x); the eight coupling
    conditions replace the c-rows at zone inlets and the q-rows at zone
    outlets, giving a generalized problem A u = lambda B u with B the
    identity zeroed on constraint rows.  Returns the finite eigenvalues.
    """
    if N < 8:
        raise ValidationError(f"polynomial degree N={N} too small (need >= 8)")
    D, _ = _cheb(N)
    Dx = -2.0 * D                     # zone has unit length; x ascends with j
    m = N + 1
    v, R, P = params.v, params.R, params.P
    n = 8 * m
    A = np.zeros((n, n))
    B = np.eye(n)
    cblk = [i * m for i in range(4)]          # c_1..c_4 block offsets
    qblk = [(4 + i) * m for i in range(4)]    # q_1..q_4 block offsets
    for i in range(4):
        c0, q0 = cblk[i], qblk[i]
        A[c0:c0 + m, c0:c0 + m] = -v[i] * Dx - R * P * P * np.eye(m)
        A[c0:c0 + m, q0:q0 + m] = R * P * np.eye(m)
        A[q0:q0 + m, q0:q0 + m] = Dx - R * np.eye(m)
        A[q0:q0 + m, c0:c0 + m] = R * P * np.eye(m)
    # c constraints at zone inlets (node 0), q constraints at outlets (node N)
    constraints = []
    constraints.append((cblk[0], [(cblk[0], v[0]), (cblk[3] + N, -v[3])]))
    constraints.append((cblk[1], [(cblk[1], 1.0), (cblk[0] + N, -1.0)]))
    constraints.append((cblk[2], [(cblk[2], v[2]), (cblk[1] + N, -v[1])]))
    constraints.append((cblk[3], [(cblk[3], 1.0), (cblk[2] + N, -1.0)]))
    constraints.append((qblk[0] + N, [(qblk[0] + N, 1.0), (qblk[1], -1.0)]))
    constraints.append((qblk[1] + N, [(qblk[1] + N, 1.0), (qblk[2], -1.0)]))
    constraints.append((qblk[2] + N, [(qblk[2] + N, 1.0), (qblk[3], -1.0)]))
    constraints.append((qblk[3] + N, [(qblk[3] + N, 1.0), (qblk[0], -1.0)]))
    for row, entries in constraints:
        A[row, :] = 0.0
        B[row, row] = 0.0
        for col, val in entries:
            A[row, col] = val
    try:
        w = scipy.linalg.eig(A, B, right=False)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigSolverFailure(str(exc)) from exc
    return w[np.isfinite(w)]


def stable_eigenvalues(params: ModelParams, N1: int = 30, N2: int = 45,
                       match_tol: float = 1e-2) -> np.ndarray:
    """Eigenvalues of the N1 collocation that persist at resolution N2.

    Filters the spurious discretization eigenvalues by keeping those with
    a partner within match_tol at the finer resolution.
    """
    w1 = collocation_spectrum(params, N1)
    w2 = collocation_spectrum(params, N2)
    if len(w2) == 0:
        return np.array([], dtype=complex)
    keep = [lam for lam in w1 if np.min(np.abs(w2 - lam)) <= match_tol]
    return np.array(keep, dtype=complex)
