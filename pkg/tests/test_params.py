import math
from dataclasses import replace

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from onefpp import ModelParams, Phase, classify_phase, compute_thresholds, validate_params
from onefpp.params import INFINITE, ParameterError
from oracles import thresholds_oracle

BASE = ModelParams(d=2, tau=2.5, alpha=3.5, mu=0.8, beta=1.0)


def test_valid_parameters_pass():
    validate_params(BASE)


def test_tau_below_two_is_rejected():
    with pytest.raises(ParameterError, match="tau must exceed 2"):
        validate_params(replace(BASE, tau=1.9))


def test_alpha_infinite_needs_c_prime():
    with pytest.raises(ParameterError, match="c_prime"):
        validate_params(replace(BASE, alpha=INFINITE))


def test_every_violation_is_listed():
    with pytest.raises(ParameterError) as info:
        validate_params(replace(BASE, tau=1.5, c_lower=2.0, c_upper=1.0, t0=2.0))
    assert len(info.value.problems) == 3


@pytest.mark.parametrize("field,value", [("d", 0), ("mu", -0.1), ("beta", 0.0), ("alpha", 1.0),
                                         ("c1", 2.0), ("mu", math.nan)])
def test_single_violations(field, value):
    with pytest.raises(ParameterError):
        validate_params(replace(BASE, **{field: value}))


def test_worked_example():
    rep = compute_thresholds(BASE)
    assert rep.mu_log == pytest.approx(0.5, rel=1e-15)
    assert rep.mu_pol_alpha == pytest.approx(2 / 3, rel=1e-15)
    assert rep.mu_pol == pytest.approx(1.0, rel=1e-15)
    assert rep.eta_0 == pytest.approx(0.6, rel=1e-14)
    assert rep.explosion_threshold == pytest.approx(0.25, rel=1e-15)
    assert rep.phase == Phase.STRICT_POLYNOMIAL


def test_linear_regime_has_eta_one():
    rep = compute_thresholds(replace(BASE, mu=2.0))
    assert rep.eta_0 == 1.0
    assert rep.phase == Phase.LINEAR


def test_both_limits_example():
    par = ModelParams(d=1, tau=2.5, alpha=INFINITE, mu=0.5, beta=INFINITE, c_prime=1.0)
    rep = compute_thresholds(par)
    assert rep.eta_0 == 0.5
    assert rep.mu_log == 0.0
    assert rep.mu_pol == 1.0
    assert rep.explosion_threshold == 0.0


@pytest.mark.parametrize("par,phase", [
    (ModelParams(d=2, tau=2.5, alpha=1.5, mu=0.1, beta=1.0), Phase.EXPLOSIVE),
    (ModelParams(d=2, tau=2.5, alpha=3.0, mu=0.4, beta=1.0), Phase.POLYLOGARITHMIC),
    (ModelParams(d=2, tau=3.5, alpha=3.0, mu=0.0, beta=INFINITE), Phase.NON_SCALE_FREE_LINEAR),
    (ModelParams(d=2, tau=2.5, alpha=1.5, mu=0.4, beta=1.0), Phase.POLYLOGARITHMIC),
    (ModelParams(d=2, tau=2.5, alpha=3.5, mu=0.5, beta=1.0), Phase.BOUNDARY),
    (ModelParams(d=2, tau=2.5, alpha=3.5, mu=1.0, beta=1.0), Phase.BOUNDARY),
    (ModelParams(d=2, tau=2.5, alpha=3.5, mu=0.25, beta=1.0), Phase.BOUNDARY),
    (ModelParams(d=2, tau=3.0, alpha=3.5, mu=0.5, beta=1.0), Phase.UNCLASSIFIED),
    (ModelParams(d=2, tau=2.5, alpha=2.0, mu=0.5, beta=1.0), Phase.UNCLASSIFIED),
])
def test_phase_examples(par, phase):
    assert classify_phase(par) == phase


def test_boundary_tolerance():
    assert classify_phase(replace(BASE, mu=1.0 + 1e-12)) == Phase.BOUNDARY
    assert classify_phase(replace(BASE, mu=1.0 + 1e-6)) == Phase.LINEAR


def test_tau_three_keeps_the_finite_formulas():
    rep = compute_thresholds(ModelParams(d=2, tau=3.0, alpha=3.5, mu=0.3, beta=1.0))
    assert rep.mu_log == 0.0
    assert rep.mu_pol == pytest.approx(max(0.5, 1.5 / 3))
    assert math.isnan(rep.explosion_threshold)


def test_beta_infinite_has_zero_explosion_threshold():
    rep = compute_thresholds(ModelParams(d=2, tau=2.5, alpha=3.5, mu=0.3, beta=INFINITE))
    assert rep.explosion_threshold == 0.0
    assert rep.mu_log == 0.0


@pytest.mark.parametrize("big", [1e3, 1e6])
def test_alpha_limit_consistency(big):
    for mu in (0.3, 0.6, 0.9, 1.5):
        fin = compute_thresholds(ModelParams(d=2, tau=2.4, alpha=big, mu=mu, beta=1.5))
        lim = compute_thresholds(ModelParams(d=2, tau=2.4, alpha=INFINITE, mu=mu, beta=1.5, c_prime=0.5))
        for f in ("mu_log", "mu_pol", "mu_pol_alpha", "eta_0"):
            assert abs(getattr(fin, f) - getattr(lim, f)) < 1e-3


def test_oracle_worked_example():
    o = thresholds_oracle(2, 2.5, 3.5, 1.0, 0.8)
    assert o["eta_0"] == pytest.approx(0.6)
    assert o["mu_pol"] == 1


taus = st.floats(2.01, 2.99)
alphas = st.one_of(st.floats(2.05, 20.0), st.just(INFINITE))
betas = st.one_of(st.floats(0.1, 5.0), st.just(INFINITE))
mus = st.floats(0.0, 4.0)
ds = st.integers(1, 4)


def _par(d, tau, alpha, beta, mu):
    return ModelParams(d=d, tau=tau, alpha=alpha, mu=mu, beta=beta,
                       c_prime=0.5 if math.isinf(alpha) else None)


@given(ds, taus, alphas, betas, mus)
def test_agrees_with_oracle(d, tau, alpha, beta, mu):
    rep = compute_thresholds(_par(d, tau, alpha, beta, mu))
    o = thresholds_oracle(d, tau, alpha, beta, mu)
    for f in ("mu_log", "mu_pol", "mu_pol_alpha", "explosion_threshold"):
        assert math.isclose(getattr(rep, f), float(o[f]), rel_tol=1e-12, abs_tol=1e-300)
    if o["eta_0"] is not None:
        assert math.isclose(rep.eta_0, float(o["eta_0"]), rel_tol=1e-12)


@given(ds, taus, st.floats(2.05, 20.0), st.floats(0.1, 5.0), mus)
def test_mu_pol_formula(d, tau, alpha, beta, mu):
    rep = compute_thresholds(_par(d, tau, alpha, beta, mu))
    assert rep.mu_pol == max((3 - tau) / beta + 1 / d, (alpha - (tau - 1)) / (d * (alpha - 2)))
    assert rep.mu_pol >= rep.mu_log + 1 / d


@given(ds, taus, alphas, betas, mus, mus)
def test_eta_monotone_in_mu(d, tau, alpha, beta, mu1, mu2):
    lo, hi = sorted((mu1, mu2))
    e1 = compute_thresholds(_par(d, tau, alpha, beta, lo)).eta_0
    e2 = compute_thresholds(_par(d, tau, alpha, beta, hi)).eta_0
    assert e1 <= e2 + 1e-15


@given(ds, taus, alphas, betas, mus)
def test_eta_range(d, tau, alpha, beta, mu):
    rep = compute_thresholds(_par(d, tau, alpha, beta, mu))
    if mu > rep.mu_log:
        assert 0 < rep.eta_0 <= 1
    if mu > rep.mu_pol:
        assert rep.eta_0 == 1


@given(ds, taus, alphas, betas, mus)
def test_eta_one_iff_linear(d, tau, alpha, beta, mu):
    rep = compute_thresholds(_par(d, tau, alpha, beta, mu))
    assume(rep.phase not in (Phase.BOUNDARY, Phase.UNCLASSIFIED))
    assert (rep.eta_0 == 1) == (rep.phase == Phase.LINEAR)


@given(ds, taus, alphas, betas)
def test_eta_continuous_above_mu_log(d, tau, alpha, beta):
    mu_log = compute_thresholds(_par(d, tau, alpha, beta, 0.0)).mu_log
    grid = [mu_log + 1e-3 + i * 1e-3 for i in range(3000)]
    etas = [compute_thresholds(_par(d, tau, alpha, beta, m)).eta_0 for m in grid[::50]]
    steps = [b - a for a, b in zip(etas, etas[1:])]
    # slopes are at most d per unit of mu, so a 0.05 step moves eta by at most 0.05 d
    assert max(steps) <= 0.05 * d + 1e-12


@given(ds, taus, alphas, betas, mus, st.floats(0.01, 1.0), st.floats(1.0, 50.0))
def test_phase_ignores_constants(d, tau, alpha, beta, mu, scale_lo, scale_hi):
    par = _par(d, tau, alpha, beta, mu)
    other = replace(par, c_lower=scale_lo, c_upper=scale_hi, c1=scale_lo, c2=scale_hi)
    assert compute_thresholds(par) == compute_thresholds(other)


@given(ds, st.floats(3.01, 6.0), st.floats(2.05, 20.0), mus)
def test_non_scale_free(d, tau, alpha, mu):
    assert classify_phase(ModelParams(d=d, tau=tau, alpha=alpha, mu=mu, beta=1.0)) == Phase.NON_SCALE_FREE_LINEAR
