"""Direct/adjoint eigenfunctions and the nonhomogeneous steady state.

On zone i the general solution of the eigenvalue ODE system is

    c_i(x) = sum_j C_i^j phi_i^j exp(nu_i^j x),
    q_i(x) = R P sum_j C_i^j exp(nu_i^j x),

with nu, phi from charfun.zone_eigen; the adjoint problem uses the same
weights with exp(-nu x).  Imposing the eight port conditions yields an
8x8 homogeneous system M(lambda) C = 0 whose rank drops to 7 exactly at
eigenvalues; coefficients are normalized by C_1^1 = 1.

The steady state with feed strength f0 solves the same system at
lambda = 0 with the x=0 jump row carrying the feed:
v2 c(0-) + f0 = v3 c(0+), i.e. right-hand side -f0 on that row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfun import zone_eigen
from .errors import (DegenerateNullspace, NearZeroPairing, NotAnEigenvalue,
                     SingularSystem, ValidationError)
from .params import ModelParams

ZONE_LEFT = (-2.0, -1.0, 0.0, 1.0)

# Singular values below RANK_RTOL * sigma_max count as zero when deciding
# whether lambda is an eigenvalue.  (The adjoint system at the case-study
# dominant root has sigma_7/sigma_max ~ 6e-7 with a genuinely simple
# nullspace, so anything looser than ~1e-8 here misclassifies it.)
RANK_RTOL = 1e-8
_FALLBACK_COND = 1e12


def _zone_tables(lam, params: ModelParams):
    nus = np.empty((4, 2), dtype=complex)
    phis = np.empty((4, 2), dtype=complex)
    for i in range(4):
        ze = zone_eigen(lam, i + 1, params)
        nus[i] = (ze.nu1, ze.nu2)
        phis[i] = (ze.phi1, ze.phi2)
    return nus, phis


def assemble_direct(lam, params: ModelParams) -> np.ndarray:
    """8x8 boundary matrix for the direct problem.

    Unknown order is zone-major: (C_1^1, C_1^2, C_2^1, ..., C_4^2).  Rows:
    q-continuity at -1, 0, +1, +-2; c-continuity at -1, +1; the v-weighted
    wrap v1 c(-2) = v4 c(2); and the x=0 jump row v2 c(0-) - v3 c(0+).
    """
    nus, phis = _zone_tables(lam, params)
    v = params.v
    e = np.exp
    (n11, n21), (n12, n22), (n13, n23), (n14, n24) = nus
    (f11, f21), (f12, f22), (f13, f23), (f14, f24) = phis
    M = np.zeros((8, 8), dtype=complex)
    M[0] = [e(-n11), e(-n21), -e(-n12), -e(-n22), 0, 0, 0, 0]
    M[1] = [0, 0, 1, 1, -1, -1, 0, 0]
    M[2] = [0, 0, 0, 0, e(n13), e(n23), -e(n14), -e(n24)]
    M[3] = [-e(-2 * n11), -e(-2 * n21), 0, 0, 0, 0, e(2 * n14), e(2 * n24)]
    M[4] = [f11 * e(-n11), f21 * e(-n21), -f12 * e(-n12), -f22 * e(-n22),
            0, 0, 0, 0]
    M[5] = [0, 0, 0, 0, f13 * e(n13), f23 * e(n23),
            -f14 * e(n14), -f24 * e(n24)]
    M[6] = [v[0] * f11 * e(-2 * n11), v[0] * f21 * e(-2 * n21), 0, 0, 0, 0,
            -v[3] * f14 * e(2 * n14), -v[3] * f24 * e(2 * n24)]
    M[7] = [0, 0, v[1] * f12, v[1] * f22, -v[2] * f13, -v[2] * f23, 0, 0]
    return M


def assemble_adjoint(lam, params: ModelParams) -> np.ndarray:
    """8x8 boundary matrix for the adjoint problem (basis exp(-nu x)).

    The adjoint port conditions swap the roles of c and q relative to the
    direct problem: v_i c* is continuous at the inner ports and c* is
    continuous at 0 and +-2, while q* is continuous everywhere.
    """
    nus, phis = _zone_tables(lam, params)
    v = params.v
    e = np.exp
    (n11, n21), (n12, n22), (n13, n23), (n14, n24) = nus
    (f11, f21), (f12, f22), (f13, f23), (f14, f24) = phis
    M = np.zeros((8, 8), dtype=complex)
    M[0] = [e(n11), e(n21), -e(n12), -e(n22), 0, 0, 0, 0]
    M[1] = [0, 0, 1, 1, -1, -1, 0, 0]
    M[2] = [0, 0, 0, 0, e(-n13), e(-n23), -e(-n14), -e(-n24)]
    M[3] = [-e(2 * n11), -e(2 * n21), 0, 0, 0, 0, e(-2 * n14), e(-2 * n24)]
    M[4] = [0, 0, f12, f22, -f13, -f23, 0, 0]
    M[5] = [f11 * e(2 * n11), f21 * e(2 * n21), 0, 0, 0, 0,
            -f14 * e(-2 * n14), -f24 * e(-2 * n24)]
    M[6] = [v[0] * f11 * e(n11), v[0] * f21 * e(n21), -v[1] * f12 * e(n12),
            -v[1] * f22 * e(n22), 0, 0, 0, 0]
    M[7] = [0, 0, 0, 0, v[2] * f13 * e(-n13), v[2] * f23 * e(-n23),
            -v[3] * f14 * e(-n14), -v[3] * f24 * e(-n24)]
    return M


@dataclass(frozen=True)
class EigenSolution:
    """Coefficients of one eigen- or steady-state solution."""

    lam: complex
    kind: str                 # "direct" | "adjoint" | "steady"
    coeffs: np.ndarray        # 8 complex, zone-major
    normalization: str
    residual: float           # max port-condition violation
    params: ModelParams
    nus: np.ndarray           # (4, 2)
    phis: np.ndarray          # (4, 2)
    sign: int                 # +1 for exp(+nu x) basis, -1 adjoint

    def zone_values(self, zone: int, x) -> tuple:
        """(c, q) of this solution on points x inside zone (1..4)."""
        x = np.asarray(x, dtype=float)
        j = zone - 1
        ex = np.exp(self.sign * np.outer(x, self.nus[j]))
        cc = self.coeffs[2 * j:2 * j + 2]
        c = ex @ (cc * self.phis[j])
        q = self.params.R * self.params.P * (ex @ cc)
        return c, q

    def zone_c_derivative(self, zone: int, x) -> np.ndarray:
        """d/dx of the c component on points x inside zone."""
        x = np.asarray(x, dtype=float)
        j = zone - 1
        ex = np.exp(self.sign * np.outer(x, self.nus[j]))
        cc = self.coeffs[2 * j:2 * j + 2]
        return ex @ (cc * self.phis[j] * self.sign * self.nus[j])


def _solve_nullspace(M: np.ndarray) -> tuple:
    """Nullspace vector of a (numerically) rank-7 matrix, C[0] = 1.

    Solves the reduced system with the first unknown pinned to 1; falls
    back to the SVD null vector when that system is too ill-conditioned
    or the pinned coefficient is genuinely zero.
    """
    sv = np.linalg.svd(M, compute_uv=False)
    smax = sv[0]
    if sv[7] > RANK_RTOL * smax:
        raise NotAnEigenvalue(
            f"smallest singular value {sv[7]:.3e} vs largest {smax:.3e}; "
            "lambda is not a root at tolerance")
    if sv[6] <= RANK_RTOL * smax:
        raise DegenerateNullspace(
            f"nullspace dimension >= 2 (sigma_7 = {sv[6]:.3e}, "
            f"sigma_max = {smax:.3e}); refusing to pick a vector")
    sol, _, rank, rs = np.linalg.lstsq(M[:, 1:], -M[:, 0], rcond=None)
    if rank == 7 and rs[0] / rs[-1] < _FALLBACK_COND:
        coeffs = np.concatenate(([1.0 + 0.0j], sol))
        return coeffs, "C11=1 (reduced system)"
    _, _, Vh = np.linalg.svd(M)
    null = Vh[-1].conj()
    if abs(null[0]) > 1e-12:
        return null / null[0], "C11=1 (SVD)"
    return null, "unit norm (SVD; C11 ~ 0)"


def eigenfunction(lam, params: ModelParams) -> EigenSolution:
    """Direct eigenfunction at a root of Delta, normalized to C_1^1 = 1."""
    M = assemble_direct(lam, params)
    coeffs, tag = _solve_nullspace(M)
    nus, phis = _zone_tables(lam, params)
    return EigenSolution(lam=complex(lam), kind="direct", coeffs=coeffs,
                         normalization=tag,
                         residual=float(np.max(np.abs(M @ coeffs))),
                         params=params, nus=nus, phis=phis, sign=+1)


def adjoint_eigenfunction(lam, params: ModelParams) -> EigenSolution:
    """Adjoint eigenfunction at a root of Delta, normalized to C_1^1 = 1."""
    M = assemble_adjoint(lam, params)
    coeffs, tag = _solve_nullspace(M)
    nus, phis = _zone_tables(lam, params)
    return EigenSolution(lam=complex(lam), kind="adjoint", coeffs=coeffs,
                         normalization=tag,
                         residual=float(np.max(np.abs(M @ coeffs))),
                         params=params, nus=nus, phis=phis, sign=-1)


def steady_state(params: ModelParams) -> EigenSolution:
    """Steady state driven by the feed term params.f0 at the x=0 port.

    Right-hand side is zero except the jump row: v2 c(0-) - v3 c(0+) = -f0.
    The system is nonsingular exactly when 0 is not an eigenvalue (strict
    port ordering).
    """
    if params.limit_case:
        raise SingularSystem(
            "equal velocities: 0 is an eigenvalue, no unique steady state")
    M = assemble_direct(0.0, params)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise SingularSystem(
            f"steady-state system singular (sigma_min/sigma_max = "
            f"{sv[-1] / sv[0]:.3e}); 0 appears to be an eigenvalue")
    rhs = np.zeros(8, dtype=complex)
    rhs[7] = -params.f0
    coeffs = np.linalg.solve(M, rhs)
    nus, phis = _zone_tables(0.0, params)
    return EigenSolution(lam=0.0 + 0.0j, kind="steady", coeffs=coeffs,
                         normalization=f"feed f0={params.f0}",
                         residual=float(np.max(np.abs(M @ coeffs - rhs))),
                         params=params, nus=nus, phis=phis, sign=+1)


@dataclass(frozen=True)
class ProfileSamples:
    """Sampled (c, q) on [-2, 2] with one-sided samples at the ports.

    side marks port samples: 'L' left limit, 'R' right limit, '.' interior.
    """

    x: np.ndarray
    c: np.ndarray
    q: np.ndarray
    side: np.ndarray


def evaluate(sol: EigenSolution, n_per_zone: int = 101) -> ProfileSamples:
    """Sample a solution zone by zone, endpoints included in every zone."""
    if n_per_zone < 2:
        raise ValidationError(f"n_per_zone must be >= 2, got {n_per_zone}")
    xs, cs, qs, sides = [], [], [], []
    for zone in range(1, 5):
        lo = ZONE_LEFT[zone - 1]
        x = np.linspace(lo, lo + 1.0, n_per_zone)
        c, q = sol.zone_values(zone, x)
        side = np.full(x.shape, ".", dtype="<U1")
        side[0], side[-1] = "R", "L"
        xs.append(x)
        cs.append(c)
        qs.append(q)
        sides.append(side)
    return ProfileSamples(x=np.concatenate(xs), c=np.concatenate(cs),
                          q=np.concatenate(qs), side=np.concatenate(sides))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def inner_product(a: EigenSolution, b: EigenSolution) -> complex:
    """<a, b> = integral over [-2,2] of (c_a conj(c_b) + q_a conj(q_b)).

    Composite 32-node Gauss-Legendre per zone; the integrands are sums of
    exponentials, so this is exact to rounding.
    """
    total = 0.0 + 0.0j
    for zone in range(1, 5):
        lo = ZONE_LEFT[zone - 1]
        x = lo + 0.5 * (1.0 + _GL_NODES)
        ca, qa = a.zone_values(zone, x)
        cb, qb = b.zone_values(zone, x)
        total += 0.5 * np.sum(_GL_WEIGHTS * (ca * np.conj(cb)
                                             + qa * np.conj(qb)))
    return complex(total)


def _samples_inner_adjoint(initial: ProfileSamples,
                           adjoint: EigenSolution) -> complex:
    """<initial, adjoint> by trapezoid on the sample grid.

    The grid duplicates port abscissae (zero-width panels), so the
    one-sided samples integrate correctly.
    """
    x = initial.x
    zone = np.minimum(np.searchsorted(np.array([-1.0, 0.0, 1.0]), x,
                                      side="right") + 1, 4)
    # left-limit samples sitting at the computed zone's own left endpoint
    # belong to the zone below
    lefts = np.array(ZONE_LEFT)[zone - 1]
    zone = np.where((initial.side == "L") & (lefts == x) & (zone > 1),
                    zone - 1, zone)
    ca = np.empty_like(x, dtype=complex)
    qa = np.empty_like(x, dtype=complex)
    for z in range(1, 5):
        m = zone == z
        ca[m], qa[m] = adjoint.zone_values(z, x[m])
    return complex(np.trapezoid(initial.c * np.conj(ca)
                                + initial.q * np.conj(qa), x))


def projection_coefficient(direct: EigenSolution, adjoint: EigenSolution,
                           initial: ProfileSamples) -> complex:
    """Leading-mode coefficient of an initial profile.

    With the adjoint rescaled so <u0, u0*> = 1, returns M1 = <initial, u0*>;
    the long-time solution behaves like M1 exp(lambda0 t) u0.
    """
    pairing = inner_product(direct, adjoint)
    na = abs(inner_product(direct, direct)) ** 0.5
    nb = abs(inner_product(adjoint, adjoint)) ** 0.5
    if abs(pairing) <= 1e-12 * na * nb:
        raise NearZeroPairing(
            f"<u0, u0*> = {pairing:.3e} is negligible against "
            f"norms {na:.3e} * {nb:.3e}")
    return _samples_inner_adjoint(initial, adjoint) / pairing
