import math

import pytest

from movingbed.errors import (NonPositiveParameter, PortOrderingViolated,
                              ValidationError)
from movingbed.params import (ModelParams, PhysicalParams, case_study,
                              from_physical, limit_params, load_params,
                              params_from_dict, params_to_dict, preset,
                              save_params, time_constant)


def test_case_study_values(cs):
    assert cs.v == (1.53, 1.12, 1.43, 1.02)
    assert cs.R == 18.0
    assert cs.P == 1.03
    assert cs.f0 == 0.0
    assert cs.strict_ports
    assert not cs.limit_case


def test_case_study_physical_consistency(cs):
    phys = cs.physical
    # R = k L_zone / u_s and v_i = m_i / (F H) up to the rounded F
    assert phys.k * phys.L_zone / phys.u_s == pytest.approx(18.0)
    F = (1.0 - phys.epsilon) / phys.epsilon
    assert F == pytest.approx(0.4925, abs=1e-4)


def test_from_physical_matches_case_study(cs):
    derived = from_physical(cs.physical, use_rounded_F=True)
    assert derived.R == pytest.approx(cs.R, rel=1e-12)
    for a, b in zip(derived.v, cs.v):
        assert a == pytest.approx(b, rel=1e-12)
    # P = sqrt(F H) = sqrt(1.07); the reference set rounds it to 1.03
    assert derived.P == pytest.approx(cs.P, abs=5e-3)


def test_limit_params():
    p = limit_params()
    assert p.limit_case
    assert not p.strict_ports
    assert p.v == (1.275, 1.275, 1.275, 1.275)


def test_positivity_validation():
    with pytest.raises(NonPositiveParameter):
        ModelParams(1.5, 1.1, 1.4, 1.0, R=-1.0, P=1.0)
    with pytest.raises(NonPositiveParameter):
        ModelParams(0.0, 1.1, 1.4, 1.0, R=18.0, P=1.0)


def test_port_ordering_validation():
    # v2 > v1 breaks the strict layout and is not the equal-velocity case
    with pytest.raises(PortOrderingViolated):
        ModelParams(1.12, 1.53, 1.43, 1.02, R=18.0, P=1.03)


def test_dict_round_trip(cs):
    assert params_from_dict(params_to_dict(cs)) == cs


def test_save_load_round_trip(tmp_path, cs):
    path = tmp_path / "params.json"
    save_params(cs, path)
    assert load_params(path) == cs


def test_time_constant(cs):
    # tau = L_ref / (u_s |lambda0|) in minutes
    tau = time_constant(-0.110377, cs.physical, L_ref=30.0)
    assert tau == pytest.approx(13.5898, abs=1e-3)


def test_presets():
    assert preset("case-study") == case_study()
    assert preset("limit") == limit_params()
    with pytest.raises(ValidationError):
        preset("nope")


def test_f0_dimensionless():
    phys = case_study().physical
    # f0 = sqrt(H/F) Q_feed / (u_s L^2) vanishes with the feed flow
    assert math.isclose(case_study(f0=0.0).f0, 0.0)
    assert case_study(f0=2.5).f0 == 2.5
