"""Time-domain simulation by operator splitting.

Each time step applies two exact sub-operators in sequence: an upwind
shift for the counter-current advection (liquid rightward at v_i, solid
leftward at unit speed) and the closed-form 2x2 relaxation of the
interphase mass transfer.  The scheme is first order in space, positivity
preserving under the CFL bound, and conserves the discrete mass
integral(c + P q) exactly when the four velocities coincide.

Grid convention: each zone carries Nx cells of width dx = 1/Nx with
centers at x_zone_left + (j - 1/2) dx for j = 1..Nx.  Index j = 0 is a
slaved inlet ghost holding the upstream zone's exit value (velocity-scaled
for c, plain copy for q); the solid phase additionally needs the next
zone's first cell as its right neighbor, wrapping zone 4 to zone 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .eigfun import ZONE_LEFT, eigenfunction, steady_state
from .errors import (BadCFL, InsufficientSamples, NonFiniteDetected,
                     ValidationError, ZeroProfile)
from .params import ModelParams
from .spectrum import dominant_eigenvalue


@dataclass(frozen=True)
class SimConfig:
    """Grid, step, horizon, feed, and recording cadence of one run."""

    Nx: int = 400
    p: float | None = None        # Courant parameter; default 0.9/max(v,1)
    T: float = 60.0
    f0: float | None = None       # overrides params.f0 when set
    record_every: int = 50
    strang: bool = False          # symmetrized splitting (off: plain order)


@dataclass
class SimState:
    """Cell arrays (zone, cell) with j=0 the slaved inlet ghost."""

    c: np.ndarray                 # (4, Nx+1)
    q: np.ndarray                 # (4, Nx+1)
    t: float
    dt: float
    dx: float


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    energy: float
    mass: float
    sup_norm: float
    profile_rms: float | None = None


def _effective_params(params: ModelParams, config: SimConfig) -> ModelParams:
    if config.f0 is not None and config.f0 != params.f0:
        return replace(params, f0=config.f0)
    return params


def _resolve_p(config: SimConfig, params: ModelParams) -> float:
    cap = 1.0 / max(max(params.v), 1.0)
    p = 0.9 * cap if config.p is None else config.p
    if not 0.0 < p < cap:
        raise BadCFL(f"Courant parameter p={p} outside (0, {cap:.6g})")
    return p


def _sync_ghosts(c: np.ndarray, q: np.ndarray, params: ModelParams) -> None:
    """Inlet ghosts from the current exit cells (flux scaling + feed)."""
    v1, v2, v3, v4 = params.v
    c[0, 0] = (v4 / v1) * c[3, -1]
    c[1, 0] = c[0, -1]
    c[2, 0] = (v2 * c[1, -1] + params.f0) / v3
    c[3, 0] = c[2, -1]
    q[:, 0] = np.roll(q[:, -1], 1)


def cell_centers(Nx: int) -> np.ndarray:
    """(4, Nx) array of cell-center coordinates, zone by zone."""
    dx = 1.0 / Nx
    offs = (np.arange(1, Nx + 1) - 0.5) * dx
    return np.asarray(ZONE_LEFT, dtype=float)[:, None] + offs[None, :]


def sample_eigenfunction(params: ModelParams, Nx: int,
                         lam: float | None = None) -> tuple:
    """Dominant (or given-eigenvalue) mode at the cell centers.

    Returns real-valued (c, q) arrays of shape (4, Nx); at a real
    eigenvalue the complex basis coefficients pair up conjugately so the
    profile itself is real.
    """
    if lam is None:
        # equal velocities: the dominant eigenvalue is 0 exactly
        lam = 0.0 if params.limit_case else dominant_eigenvalue(params)
    sol = eigenfunction(lam, params)
    xs = cell_centers(Nx)
    c = np.empty((4, Nx))
    q = np.empty((4, Nx))
    for zone in range(1, 5):
        cz, qz = sol.zone_values(zone, xs[zone - 1])
        c[zone - 1] = cz.real
        q[zone - 1] = qz.real
    return c, q


def sample_steady_state(params: ModelParams, Nx: int) -> tuple:
    """Forced steady profile at the cell centers, shape (4, Nx) each."""
    sol = steady_state(params)
    xs = cell_centers(Nx)
    c = np.empty((4, Nx))
    q = np.empty((4, Nx))
    for zone in range(1, 5):
        cz, qz = sol.zone_values(zone, xs[zone - 1])
        c[zone - 1] = cz.real
        q[zone - 1] = qz.real
    return c, q


def init(config: SimConfig, params: ModelParams, initial="constant") -> SimState:
    """Fresh state with cells sampled from the initial condition.

    ``initial`` may be a preset name ("constant" for (1, P), "zero",
    "eigenfunction" for the dominant mode), a callable
    f(zone, x_array) -> (c_values, q_values), or a pair of (4, Nx) arrays.
    """
    params = _effective_params(params, config)
    if config.Nx < 8:
        raise ValidationError(f"Nx={config.Nx} below the minimum of 8")
    if config.record_every < 1:
        raise ValidationError("record_every must be a positive integer")
    if config.T < 0:
        raise ValidationError(f"T={config.T} must be nonnegative")
    p = _resolve_p(config, params)
    dx = 1.0 / config.Nx
    c = np.zeros((4, config.Nx + 1))
    q = np.zeros((4, config.Nx + 1))
    if callable(initial):
        xs = cell_centers(config.Nx)
        for zone in range(1, 5):
            cz, qz = initial(zone, xs[zone - 1])
            c[zone - 1, 1:] = cz
            q[zone - 1, 1:] = qz
    elif isinstance(initial, str):
        if initial == "constant":
            c[:, 1:] = 1.0
            q[:, 1:] = params.P
        elif initial == "eigenfunction":
            c[:, 1:], q[:, 1:] = sample_eigenfunction(params, config.Nx)
        elif initial == "zero":
            pass
        else:
            raise ValidationError(f"unknown initial preset {initial!r}")
    else:
        c0, q0 = initial
        c0 = np.asarray(c0, dtype=float)
        q0 = np.asarray(q0, dtype=float)
        if c0.shape != (4, config.Nx) or q0.shape != (4, config.Nx):
            raise ValidationError(
                f"custom samples must have shape (4, {config.Nx})")
        c[:, 1:] = c0
        q[:, 1:] = q0
    _sync_ghosts(c, q, params)
    return SimState(c=c, q=q, t=0.0, dt=p * dx, dx=dx)


def advection_step(state: SimState, params: ModelParams,
                   frac: float = 1.0) -> SimState:
    """Upwind transport of both phases over frac*dt (ghosts refreshed)."""
    p = frac * state.dt / state.dx
    vcol = np.asarray(params.v)[:, None]
    c, q = state.c, state.q
    cn = np.empty_like(c)
    qn = np.empty_like(q)
    cn[:, 1:] = c[:, 1:] - vcol * p * (c[:, 1:] - c[:, :-1])
    qn[:, 1:-1] = q[:, 1:-1] + p * (q[:, 2:] - q[:, 1:-1])
    # solid right neighbor of the last cell is the next zone's first cell
    qn[:, -1] = q[:, -1] + p * (np.roll(q[:, 1], -1) - q[:, -1])
    _sync_ghosts(cn, qn, params)
    return SimState(c=cn, q=qn, t=state.t, dt=state.dt, dx=state.dx)


def mass_transfer_step(state: SimState, params: ModelParams) -> SimState:
    """Exact interphase relaxation over dt; conserves c + P q cellwise."""
    R, P = params.R, params.P
    e = math.exp(-R * (P * P + 1.0) * state.dt)
    den = 1.0 + P * P
    c, q = state.c, state.q
    cn = (c * (1.0 + P * P * e) + P * q * (1.0 - e)) / den
    qn = (P * c * (1.0 - e) + q * (P * P + e)) / den
    _sync_ghosts(cn, qn, params)
    return SimState(c=cn, q=qn, t=state.t, dt=state.dt, dx=state.dx)


def energy(state: SimState, params: ModelParams) -> float:
    """E = 1/2 * sum (c^2 + q^2) dx over the interior cells."""
    c, q = state.c[:, 1:], state.q[:, 1:]
    return 0.5 * float(np.sum(c * c) + np.sum(q * q)) * state.dx


def mass(state: SimState, params: ModelParams) -> float:
    """Q = sum (c + P q) dx over the interior cells."""
    return float(np.sum(state.c[:, 1:] + params.P * state.q[:, 1:])) \
        * state.dx


def sup_norm(state: SimState) -> float:
    return float(max(np.abs(state.c[:, 1:]).max(),
                     np.abs(state.q[:, 1:]).max()))


def profile_rms(state: SimState, eigen_profile: tuple) -> float:
    """Distance to the best scalar multiple of a reference profile.

    Minimizes ||state - s*ref|| over s and returns the minimum divided by
    ||s*ref|| (both RMS over interior cells, both components).
    """
    ref_c, ref_q = eigen_profile
    sc, sq = state.c[:, 1:], state.q[:, 1:]
    den = float(np.sum(ref_c * ref_c) + np.sum(ref_q * ref_q))
    if den == 0.0:
        raise ZeroProfile("reference profile is identically zero")
    s = float(np.sum(sc * ref_c) + np.sum(sq * ref_q)) / den
    scaled = abs(s) * math.sqrt(den)
    if scaled == 0.0:
        raise ZeroProfile("state has no component along the profile")
    diff = math.sqrt(float(np.sum((sc - s * ref_c) ** 2)
                           + np.sum((sq - s * ref_q) ** 2)))
    return diff / scaled


def _row(state, params, eigen_profile) -> DiagnosticsRow:
    rms = None
    if eigen_profile is not None:
        rms = profile_rms(state, eigen_profile)
    return DiagnosticsRow(t=state.t, energy=energy(state, params),
                          mass=mass(state, params),
                          sup_norm=sup_norm(state), profile_rms=rms)


def run(state: SimState, config: SimConfig, params: ModelParams,
        callbacks=None, eigen_profile: tuple | None = None):
    """March to t >= T, recording diagnostics every record_every steps.

    Returns (final state, list of DiagnosticsRow).  Callbacks, if given,
    are invoked as cb(state, row) at every recorded step.
    """
    params = _effective_params(params, config)
    if callbacks is None:
        callbacks = []
    elif callable(callbacks):
        callbacks = [callbacks]
    n_steps = int(math.ceil(config.T / state.dt - 1e-12))
    rows = [_row(state, params, eigen_profile)]
    for cb in callbacks:
        cb(state, rows[-1])
    for n in range(1, n_steps + 1):
        if config.strang:
            state = advection_step(state, params, frac=0.5)
            state = mass_transfer_step(state, params)
            state = advection_step(state, params, frac=0.5)
        else:
            state = advection_step(state, params)
            state = mass_transfer_step(state, params)
        state.t = n * state.dt
        if n % config.record_every == 0 or n == n_steps:
            if not (np.all(np.isfinite(state.c))
                    and np.all(np.isfinite(state.q))):
                raise NonFiniteDetected(
                    f"non-finite cell value at step {n}, t={state.t:.6g}")
            rows.append(_row(state, params, eigen_profile))
            for cb in callbacks:
                cb(state, rows[-1])
    return state, rows


def decay_rate(diagnostics, window) -> float:
    """Least-squares slope of log(sup_norm) over a time window."""
    t_lo, t_hi = window
    pts = [(r.t, r.sup_norm) for r in diagnostics if t_lo <= r.t <= t_hi]
    if len(pts) < 10:
        raise InsufficientSamples(
            f"only {len(pts)} diagnostics rows in window [{t_lo}, {t_hi}]; "
            "need at least 10")
    ts = np.array([p[0] for p in pts])
    sups = np.array([p[1] for p in pts])
    if np.any(sups <= 0.0):
        raise InsufficientSamples(
            "sup_norm hit zero inside the fit window; no decay rate")
    return float(np.polyfit(ts, np.log(sups), 1)[0])
