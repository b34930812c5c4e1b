import math

import numpy as np
import pytest

from movingbed.charfun import return_map
from movingbed.errors import (LimitCaseHasNoBracket, ValidationError)
from movingbed.params import limit_params
from movingbed.spectrum import (bracket_bound, collocation_spectrum,
                                dominant_eigenvalue, imaginary_vanishing_k,
                                limit_asymptote, limit_residual,
                                limit_spectrum, real_root_scan,
                                stable_eigenvalues, threads_from_env)


def test_bracket_bound_frozen_values(cs):
    bb = bracket_bound(cs)
    assert bb.M0 == pytest.approx(6.692779110045295, rel=1e-12)
    assert bb.Q0 == pytest.approx(1.6724533980582525, rel=1e-12)


def test_bracket_bound_rejects_limit_case(lp):
    with pytest.raises(LimitCaseHasNoBracket):
        bracket_bound(lp)


def test_dominant_eigenvalue(cs):
    lam = dominant_eigenvalue(cs, tol=1e-12)
    assert lam == pytest.approx(-0.1103771231538904, abs=1e-9)
    # the root actually zeroes the (scaled) characteristic function
    assert abs(return_map(lam, cs)._delta_parts[0]) <= 1e-9


def test_dominant_eigenvalue_tol_validation(cs):
    with pytest.raises(ValidationError):
        dominant_eigenvalue(cs, tol=0.0)
    with pytest.raises(ValidationError):
        dominant_eigenvalue(cs, tol=10.0)   # larger than the bracket bound


def test_dominant_eigenvalue_threads_agree(cs):
    a = dominant_eigenvalue(cs, tol=1e-11, threads=1)
    b = dominant_eigenvalue(cs, tol=1e-11, threads=4)
    assert a == b


def test_threads_from_env(monkeypatch):
    monkeypatch.setenv("TMB_THREADS", "3")
    assert threads_from_env() == 3
    monkeypatch.delenv("TMB_THREADS")
    assert threads_from_env() >= 1


def test_real_root_scan_finds_deeper_roots(cs, lam0):
    roots = real_root_scan(cs, (-14.0, -0.01), grid_n=400, tol=1e-10)
    assert any(abs(r - lam0) < 1e-6 for r in roots)
    assert any(abs(r + 12.701155) < 1e-4 for r in roots)
    assert any(abs(r + 12.608163) < 1e-4 for r in roots)


def test_real_root_scan_brackets(cs):
    triples = real_root_scan(cs, (-1.0, -0.01), grid_n=100, tol=1e-10,
                             with_brackets=True)
    assert len(triples) == 1
    root, lo, hi = triples[0]
    assert lo <= root <= hi


def test_real_root_scan_empty_and_invalid(cs):
    assert real_root_scan(cs, (-5.0, -5.0)) == []
    with pytest.raises(ValidationError):
        real_root_scan(cs, (1.0, -1.0))


# ---------------------------------------------------------------------------
# equal-velocity closed forms
# ---------------------------------------------------------------------------

def test_limit_k0_exact(lp):
    table = limit_spectrum(lp, k_max=5)
    k0 = next(e for e in table if e.k == 0)
    assert k0.lambda_plus == 0.0
    assert k0.lambda_minus == -lp.R * (1.0 + lp.P ** 2)


def test_limit_conjugate_symmetry(lp):
    table = {e.k: e for e in limit_spectrum(lp, k_max=12)}
    for k in range(1, 13):
        assert table[-k].lambda_plus == table[k].lambda_plus.conjugate()
        assert table[-k].lambda_minus == table[k].lambda_minus.conjugate()


def test_limit_real_parts_monotone(lp):
    table = {e.k: e for e in limit_spectrum(lp, k_max=30)}
    re_plus = [table[k].lambda_plus.real for k in range(0, 31)]
    re_minus = [table[k].lambda_minus.real for k in range(0, 31)]
    assert all(np.diff(re_plus) <= 1e-12)      # decreasing toward -R
    assert all(np.diff(re_minus) >= -1e-12)    # increasing toward -R P^2


def test_limit_residuals(lp):
    table = limit_spectrum(lp, k_max=8)
    for e in table:
        assert limit_residual(e.lambda_plus, lp) <= 1e-8
        assert limit_residual(e.lambda_minus, lp) <= 1e-8


def test_limit_asymptote_converges(lp):
    # the large-k expansion is accurate to O(k^-3): err * k^3 stays bounded
    # and non-increasing once k is moderately large
    table = {e.k: e for e in limit_spectrum(lp, k_max=80)}
    scaled = []
    for k in (20, 40, 80):
        plus, minus = limit_asymptote(lp, k)
        err = max(abs(table[k].lambda_plus - plus),
                  abs(table[k].lambda_minus - minus))
        scaled.append(err * k ** 3)
    assert scaled[0] >= scaled[1] >= scaled[2]
    assert scaled[0] < 5e3


def test_imaginary_vanishing_k(lp):
    k_star = imaginary_vanishing_k(lp)
    assert k_star == pytest.approx(14.340311264045784, rel=1e-12)
    # equal phase speeds: the prefactor 1/(v-1) blows up, no crossing
    assert imaginary_vanishing_k(limit_params(v=1.0)) is None


def test_limit_spectrum_rejects_strict_ports(cs):
    with pytest.raises(ValidationError):
        limit_spectrum(cs, k_max=3)


# ---------------------------------------------------------------------------
# collocation cross-check
# ---------------------------------------------------------------------------

def test_collocation_contains_dominant(cs, lam0):
    eigs = collocation_spectrum(cs, N=30)
    real_ones = eigs[np.abs(eigs.imag) < 1e-8]
    assert np.abs(real_ones.real - lam0).min() <= 1e-6


def test_collocation_limit_matches_closed_form(lp):
    eigs = collocation_spectrum(lp, N=40)
    table = limit_spectrum(lp, k_max=3)
    for e in table:
        if abs(e.k) > 2:
            continue
        for lam in (e.lambda_plus, e.lambda_minus):
            assert np.abs(eigs - lam).min() <= 1e-6


def test_collocation_validates_N(cs):
    with pytest.raises(ValidationError):
        collocation_spectrum(cs, N=4)


def test_stable_eigenvalues(cs, lam0):
    stable = stable_eigenvalues(cs, N1=30, N2=45)
    assert np.abs(np.asarray(stable) - lam0).min() <= 1e-6
