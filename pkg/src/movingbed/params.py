"""Model parameters: validation, physical-to-dimensionless conversion, presets.

The dimensionless model is governed by four zone liquid velocities
``v1..v4``, the kinetic group ``R = k*L_zone/u_s``, the phase-equilibrium
group ``P = sqrt(F*H)`` with ``F = (1-eps)/eps``, and the feed inflow
``f0 = sqrt(H/F)*Q_feed/(u_s*L^2)``.

Two velocity regimes are supported:

* ``strict_ports`` -- v1 > v2, v3 > v4, v3 > v2, v1 > v4 (all four ports
  active); and
* ``limit_case``   -- all four velocities equal (no port dissipation).

Anything in between (some but not all equalities) is rejected at
construction time, because none of the quantitative results downstream
apply there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

from .errors import (
    NonNegativeEigenvalue,
    NonPositiveParameter,
    PortOrderingViolated,
    ValidationError,
)


@dataclass(frozen=True)
class PhysicalParams:
    """Physical column data (lengths in cm, times in minutes)."""

    epsilon: float          # void fraction, 0 < epsilon < 1
    H: float                # linear-isotherm equilibrium constant
    k: float                # kinetic constant, 1/min
    L_zone: float           # zone length, cm
    L_column: float         # single-column length, cm
    u_s: float              # solid-phase velocity, cm/min
    m1: float               # zone flow ratios (dimensionless)
    m2: float
    m3: float
    m4: float
    c_feed: float = 1.0     # feed concentration (reference scale)
    Q_feed: float = 0.0     # feed flow rate

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise NonPositiveParameter(
                f"epsilon must lie in (0, 1), got {self.epsilon}")
        for name in ("H", "k", "L_zone", "L_column", "u_s",
                     "m1", "m2", "m3", "m4"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise NonPositiveParameter(
                    f"{name} must be a positive finite number, got {value}")

    @property
    def F(self) -> float:
        """Phase ratio (1 - eps)/eps."""
        return (1.0 - self.epsilon) / self.epsilon

    @property
    def m(self) -> tuple:
        return (self.m1, self.m2, self.m3, self.m4)


# Port inequalities that must all hold strictly outside the limit case.
_PORT_INEQUALITIES = (("v1", "v2"), ("v3", "v4"), ("v3", "v2"), ("v1", "v4"))


@dataclass(frozen=True)
class ModelParams:
    """The six dimensionless parameters plus the feed inflow f0."""

    v1: float
    v2: float
    v3: float
    v4: float
    R: float
    P: float
    f0: float = 0.0
    physical: PhysicalParams | None = None

    def __post_init__(self):
        for name in ("v1", "v2", "v3", "v4", "R", "P"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise NonPositiveParameter(
                    f"{name} must be a positive finite number, got {value}")
        if not (math.isfinite(self.f0) and self.f0 >= 0.0):
            raise NonPositiveParameter(
                f"f0 must be a nonnegative finite number, got {self.f0}")
        if not self.limit_case:
            for lhs, rhs in _PORT_INEQUALITIES:
                if not getattr(self, lhs) > getattr(self, rhs):
                    raise PortOrderingViolated(
                        f"{lhs} > {rhs} violated: "
                        f"{lhs}={getattr(self, lhs)}, {rhs}={getattr(self, rhs)}"
                    )

    @property
    def v(self) -> tuple:
        return (self.v1, self.v2, self.v3, self.v4)

    @property
    def limit_case(self) -> bool:
        """True when all four velocities are equal."""
        return self.v1 == self.v2 == self.v3 == self.v4

    @property
    def strict_ports(self) -> bool:
        """True when all four port inequalities hold strictly."""
        return not self.limit_case


def validate(params: ModelParams) -> ModelParams:
    """Re-run the construction checks and return the (tagged) params.

    Idempotent: construction already validates, so this re-asserts the
    invariants (useful after deserialization from untrusted sources).
    """
    return ModelParams(params.v1, params.v2, params.v3, params.v4,
                       params.R, params.P, params.f0, params.physical)


def from_physical(phys: PhysicalParams, use_rounded_F: bool = False) -> ModelParams:
    """Build dimensionless parameters from physical column data.

    ``use_rounded_F`` rounds the phase ratio F to one decimal before use,
    which reproduces hand calculations that take F = 0.5 for eps = 0.67.
    """
    F = phys.F
    if use_rounded_F:
        F = round(F, 1)
    if F <= 0.0:
        raise NonPositiveParameter(f"phase ratio F must be positive, got {F}")
    v = tuple(F * mi for mi in phys.m)
    R = phys.k * phys.L_zone / phys.u_s
    P = math.sqrt(F * phys.H)
    f0 = math.sqrt(phys.H / F) * phys.Q_feed / (phys.u_s * phys.L_zone ** 2)
    return ModelParams(v[0], v[1], v[2], v[3], R=R, P=P, f0=f0, physical=phys)


def time_constant(lambda0: float, phys: PhysicalParams, L_ref: float) -> float:
    """Physical time constant tau = L_ref/(u_s*|lambda0|) in minutes.

    ``L_ref`` is explicit because the kinetic group uses the zone length
    while the time scale may use the column length; the caller chooses.
    """
    if lambda0 >= 0.0:
        raise NonNegativeEigenvalue(
            f"time constant requires a negative rate, got {lambda0}")
    if L_ref <= 0.0:
        raise NonPositiveParameter(f"L_ref must be positive, got {L_ref}")
    return L_ref / (phys.u_s * abs(lambda0))


# -- serialization ----------------------------------------------------------

def params_to_dict(params: ModelParams) -> dict:
    out = {
        "v": [params.v1, params.v2, params.v3, params.v4],
        "R": params.R,
        "P": params.P,
        "f0": params.f0,
    }
    if params.physical is not None:
        out["physical"] = asdict(params.physical)
    return out


def params_from_dict(data: dict) -> ModelParams:
    v = data["v"]
    if len(v) != 4:
        raise NonPositiveParameter(f"'v' must hold 4 velocities, got {len(v)}")
    phys = None
    if data.get("physical") is not None:
        phys = PhysicalParams(**data["physical"])
    return ModelParams(float(v[0]), float(v[1]), float(v[2]), float(v[3]),
                       R=float(data["R"]), P=float(data["P"]),
                       f0=float(data.get("f0", 0.0)), physical=phys)


def load_params(path) -> ModelParams:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_dict(json.load(fh))


def save_params(params: ModelParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params_to_dict(params), fh, indent=2)
        fh.write("\n")


# -- presets ----------------------------------------------------------------

def case_study(f0: float = 0.0) -> ModelParams:
    """Reference strict-port case: v=(1.53,1.12,1.43,1.02), R=18, P=1.03."""
    phys = PhysicalParams(epsilon=0.67, H=2.14, k=6.0, L_zone=60.0,
                          L_column=30.0, u_s=20.0,
                          m1=3.06, m2=2.24, m3=2.86, m4=2.04)
    return ModelParams(1.53, 1.12, 1.43, 1.02, R=18.0, P=1.03,
                       f0=f0, physical=phys)


def limit_params(v: float = 1.275, R: float = 18.0, P: float = 1.03,
                 f0: float = 0.0) -> ModelParams:
    """Equal-velocity parameters; default v is the case-study average."""
    return ModelParams(v, v, v, v, R=R, P=P, f0=f0)


def preset(name: str) -> ModelParams:
    presets = {
        "case-study": case_study,
        "limit": limit_params,
    }
    try:
        return presets[name]()
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; choose from {sorted(presets)}") from None
