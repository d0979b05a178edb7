"""Property-based oracle equivalences (100 draws each) and the stability dichotomy."""
import numpy as np
from hypothesis import given, settings, strategies as st

from optosqueeze.dynamics import EffectiveParams, classify_stability

from oracles import (analytic_deviation, forms_deviation, full_params, quadrature_deviation,
                     reservoir_deviation, rk4_deviation)

DRAWS = settings(max_examples=100, deadline=None)

kappa = st.floats(5e-4, 2e-3)
occupation = st.floats(0.0, 2.0)


@DRAWS
@given(g=st.floats(0.05, 0.25), ratio=st.floats(8.0, 10.0), ka=kappa, kb=kappa, n_m=st.floats(0.0, 20.0))
def test_propagator_vs_rk4(g, ratio, ka, kb, n_m):
    assert rk4_deviation(full_params(g, ratio, ka, kb, n_m)) < 1e-6


# unstable and stable bands, both clear of the g_eff^2 = kappa_a kappa_b pole
eff_params = st.builds(EffectiveParams, g_eff=st.floats(2.5e-3, 5e-3) | st.floats(1e-4, 4e-4),
                       kappa_a=kappa, kappa_b=kappa, n_a=occupation, n_b=occupation)


@DRAWS
@given(ep=eff_params)
def test_analytic_vs_propagator(ep):
    assert analytic_deviation(ep) < 1e-8


@DRAWS
@given(g=st.floats(5e-3, 0.3), ratio=st.floats(0.05, 0.99), ka=st.floats(1e-4, 1e-2),
       km=st.floats(1e-7, 1e-4))
def test_reservoir_closed_form_vs_lyapunov(g, ratio, ka, km):
    assert reservoir_deviation(g, ratio, ka, km) < 1e-10


@DRAWS
@given(ep=eff_params)
def test_variance_forms_agree(ep):
    assert forms_deviation(ep) < 1e-12


@DRAWS
@given(seed=st.integers(0, 2**32 - 1))
def test_eigen_min_vs_angle_min(seed):
    from oracles import random_pd
    assert quadrature_deviation(random_pd(np.random.default_rng(seed))) < 1e-6


log_rate = st.floats(-5.0, -2.0).map(lambda e: 10.0 ** e)


@settings(max_examples=1000, deadline=None)
@given(g=log_rate, ka=log_rate, kb=log_rate)
def test_stability_dichotomy(g, ka, kb):
    gap = g * g - ka * kb
    if abs(gap) <= 1e-12:
        return
    rep = classify_stability(EffectiveParams(g, ka, kb).drift)
    assert rep.status == ("unstable" if gap > 0 else "stable")
    assert rep.effective_criterion is (gap < 0)
