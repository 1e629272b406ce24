import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dexp
from riskexit.errors import DomainError, UnsupportedClaimLawError
from riskexit.model import (
    ExponentialClaims,
    GenericClaims,
    ModelParams,
    charfn_killed,
    cumulant,
    cumulant_real,
    drift,
    moments,
    reflect,
    regime,
    variance,
)

model_args = st.tuples(
    st.floats(0.2, 5.0),   # lam
    st.floats(0.05, 0.95),  # p
    st.floats(0.2, 5.0),   # c
    st.floats(0.2, 5.0),   # b
)


def test_cumulant_examples(sym):
    assert cumulant_real(sym, 0.0) == 0.0
    assert cumulant_real(sym, 0.5) == pytest.approx(1 / 3, abs=1e-15)
    assert cumulant_real(dexp(1, 0.4, 2, 1), 0.8) == pytest.approx(0.0, abs=1e-15)


def test_cumulant_blows_up_at_c(sym):
    assert cumulant_real(sym, 1 - 1e-9) > 1e8
    with pytest.raises(DomainError):
        cumulant_real(sym, 1.0)


def test_moments_examples(sym):
    assert drift(sym) == 0.0
    assert variance(sym) == pytest.approx(2.0)
    assert drift(dexp(1, 0.6, 1, 2)) == pytest.approx(0.4)
    assert drift(dexp(1, 0.4, 2, 1)) == pytest.approx(-0.4)
    assert regime(sym) == "zero"
    assert regime(dexp(1, 1 / 3, 1, 2)) == "zero"
    assert regime(dexp(1, 0.6, 1, 2)) == "positive"
    assert regime(dexp(1, 0.4, 2, 1)) == "negative"


def test_taylor_consistency(model):
    params = model[0]
    mom = moments(params)
    h = 1e-4
    # the real cumulant psi(-ir) has expansion m r + sigma^2 r^2 / 2 + O(r^3)
    assert cumulant_real(params, h) == pytest.approx(h * mom.m + h * h * mom.sigma1_sq / 2,
                                                     abs=10 * h**3)


def test_charfn_killed(sym):
    assert charfn_killed(sym, 1.0, 0.0) == 1 + 0j
    assert abs(charfn_killed(sym, 1.0, 1.0)) <= 1.0


@settings(max_examples=60, deadline=None)
@given(model_args, st.floats(1e-3, 50.0), st.floats(-40.0, 40.0))
def test_charfn_properties(args, s, alpha):
    params = dexp(*args)
    phi = charfn_killed(params, s, alpha)
    assert abs(phi) <= 1 + 1e-12
    assert charfn_killed(params, s, -alpha) == pytest.approx(np.conj(phi), abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(model_args)
def test_cumulant_convex(args):
    params = dexp(*args)
    c, b = params.c, params.claims.b
    r = np.linspace(-0.95 * b, 0.95 * c, 201)
    vals = np.array([cumulant_real(params, v) for v in r])
    second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
    assert np.all(second >= -1e-9 * np.maximum(1.0, np.abs(vals[1:-1])))


def test_cumulant_matches_charfn_on_real_axis(model):
    params = model[0]
    alpha = np.linspace(-5, 5, 11)
    direct = (params.lam * params.p * (params.c / (params.c - 1j * alpha) - 1)
              + params.lam * params.q * (params.claims.b / (params.claims.b + 1j * alpha) - 1))
    assert np.allclose(cumulant(params, alpha), direct, atol=1e-15)


def test_parameter_validation():
    with pytest.raises(DomainError):
        dexp(1, 1.0, 1, 1)
    with pytest.raises(DomainError):
        dexp(0, 0.5, 1, 1)
    with pytest.raises(DomainError):
        dexp(1, 0.5, -1, 1)
    with pytest.raises(DomainError):
        ExponentialClaims(0.0)


def test_json_round_trip(model):
    params = model[0]
    again = ModelParams.from_dict(json.loads(json.dumps(params.to_dict())))
    assert again == params


def test_from_dict_checks_q():
    doc = {"lambda": 1, "p": 0.5, "q": 0.4, "c": 1, "claims": {"type": "exp", "b": 1}}
    with pytest.raises(DomainError):
        ModelParams.from_dict(doc)
    with pytest.raises(DomainError):
        ModelParams.from_dict({"lambda": 1, "p": 0.5})


def test_generic_table_moments():
    # uniform(0, 2) as a two-node quantile table
    claims = GenericClaims("table", [0.0, 2.0], [0.0, 1.0])
    assert claims.mean == pytest.approx(1.0)
    assert claims.second_moment == pytest.approx(4 / 3)
    assert claims.laplace(1.0) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-6)
    params = ModelParams(1.0, 0.5, 1.0, claims)
    assert drift(params) == pytest.approx(0.0)


def test_generic_sample_and_reflect():
    claims = GenericClaims("sample", [1.0, 2.0, 3.0])
    assert claims.mean == pytest.approx(2.0)
    params = ModelParams(1.0, 0.5, 1.0, claims)
    assert cumulant_real(params, 0.3) == pytest.approx(
        0.5 * 0.3 / 0.7 + 0.5 * (np.mean(np.exp(-0.3 * np.array([1, 2, 3]))) - 1))
    with pytest.raises(UnsupportedClaimLawError):
        reflect(params)
    with pytest.raises(DomainError):
        GenericClaims("sample", [1.0, -1.0])


def test_reflect_negates_drift(model):
    params = model[0]
    assert drift(reflect(params)) == pytest.approx(-drift(params), abs=1e-15)
    twice = reflect(reflect(params))
    assert (twice.lam, twice.c, twice.claims) == (params.lam, params.c, params.claims)
    assert twice.p == pytest.approx(params.p, abs=1e-15)
