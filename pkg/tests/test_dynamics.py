import math

import numpy as np
import pytest
from scipy import linalg

from optosqueeze.dynamics import (CovarianceState, EffectiveParams, analytic_coefficients,
                                  analytic_eff_cm, analytic_eff_elements, classify_stability, evolve,
                                  evolve_many, evolve_rk4, reservoir_steady_elements, steady_state,
                                  write_trajectory_csv)
from optosqueeze.errors import (DegenerateCoupling, DimensionMismatch, InvalidRegime, NonFiniteResult,
                                StabilityPole, Unstable)
from optosqueeze.matrices import build_diffusion, build_full_drift, build_reservoir_drift
from optosqueeze.model import SystemParams


def test_covariance_state_guards():
    with pytest.raises(DimensionMismatch):
        CovarianceState(np.eye(5))
    with pytest.raises(ValueError):
        CovarianceState(np.eye(4) + np.triu(np.ones((4, 4)), 1))
    s = CovarianceState.thermal([1.0, 0.0, 2.0])
    assert np.allclose(np.diag(s.v), [1.5, 1.5, 0.5, 0.5, 2.5, 2.5])
    assert s.basis[4] == "X_m"
    assert s.element("X_m", "X_m") == 2.5


def test_evolve_zero_time_and_bad_input(fig2_eff):
    v0 = fig2_eff.initial_state()
    assert np.array_equal(evolve(fig2_eff.drift, fig2_eff.diffusion, v0, 0.0).v, v0.v)
    with pytest.raises(ValueError):
        evolve(fig2_eff.drift, fig2_eff.diffusion, v0, -1.0)
    with pytest.raises(DimensionMismatch):
        evolve(fig2_eff.drift, fig2_eff.diffusion, CovarianceState.vacuum(6), 1.0)


def test_effective_propagator_matches_closed_form(fig2_eff):
    v = evolve(fig2_eff.drift, fig2_eff.diffusion, fig2_eff.initial_state(), 100.0)
    ref = analytic_eff_cm(fig2_eff, 100.0)
    assert np.max(np.abs(v.v - ref.v)) < 1e-8
    assert v.t == 100.0


def test_closed_form_vectorized(fig2_eff):
    ts = np.array([0.0, 50.0, 300.0])
    v11, v44, v14 = analytic_eff_elements(fig2_eff, ts)
    assert v11[0] == pytest.approx(0.5, abs=1e-14) and v14[0] == pytest.approx(0.0, abs=1e-14)
    assert v11[2] == pytest.approx(analytic_eff_cm(fig2_eff, 300.0).v[0, 0])


def test_closed_form_asymmetric_thermal():
    ep = EffectiveParams(g_eff=-4e-3, kappa_a=2e-3, kappa_b=0.7e-3, n_a=0.3, n_b=1.2)
    for t in (10.0, 250.0):
        v = evolve(ep.drift, ep.diffusion, ep.initial_state(), t)
        assert np.max(np.abs(v.v - analytic_eff_cm(ep, t).v)) < 1e-8


def test_closed_form_errors():
    with pytest.raises(DegenerateCoupling):
        analytic_coefficients(EffectiveParams(0.0))
    with pytest.raises(StabilityPole):
        analytic_coefficients(EffectiveParams(1e-3))


def test_fig2_coefficients(fig2_eff):
    k = analytic_coefficients(fig2_eff)
    assert k.Omega == pytest.approx(2 / 150)
    assert k.C_minus == pytest.approx(0.2173913043478261, rel=1e-12)
    assert k.C_plus == pytest.approx(0.29411764705882354, rel=1e-12)
    assert k.phi_tilde == pytest.approx(math.pi / 4)
    assert k.Omega - 2e-3 == pytest.approx(1.1333e-2, rel=1e-4)


def test_unstable_growth_exponent(fig2_eff):
    v1 = evolve(fig2_eff.drift, fig2_eff.diffusion, fig2_eff.initial_state(), 2000.0).v[0, 0]
    v2 = evolve(fig2_eff.drift, fig2_eff.diffusion, fig2_eff.initial_state(), 2500.0).v[0, 0]
    assert math.log(v2 / v1) / 500.0 == pytest.approx(2 / 150 - 2e-3, rel=1e-6)


def test_overflow_guard(fig2_eff):
    with pytest.raises(NonFiniteResult):
        evolve(fig2_eff.drift, fig2_eff.diffusion, fig2_eff.initial_state(), 1e5)
    with pytest.raises(NonFiniteResult):
        analytic_eff_cm(fig2_eff, 1e5)


def test_rk4_matches_propagator(fig2):
    a, d = build_full_drift(fig2), build_diffusion(fig2)
    v0 = CovarianceState.vacuum()
    exact = evolve(a, d, v0, 120.0).v
    rk = evolve_rk4(a, d, v0, 120.0).v
    assert np.max(np.abs(exact - rk)) < 1e-6


def test_full_vs_effective_window(fig2, fig2_eff):
    # design target: V11 within 15% of the two-photon model up to t = 600
    a, d = build_full_drift(fig2), build_diffusion(fig2)
    ts = np.linspace(0.0, 600.0, 601)
    full = np.array([s.v[0, 0] for s in evolve_many(a, d, CovarianceState.vacuum(), ts)])
    eff = analytic_eff_elements(fig2_eff, ts)[0]
    dev = np.abs(full - eff) / eff
    assert dev.max() < 0.15
    # worst point is the early counter-rotating transient near t = 3
    assert dev.max() == pytest.approx(0.1038, abs=1e-3)
    assert ts[np.argmax(dev)] == 3.0
    assert dev[-1] == pytest.approx(0.0544, abs=1e-3)


def test_stability_classification(fig2, fig2_eff):
    assert classify_stability(build_full_drift(fig2)).status == "unstable"
    rep = classify_stability(fig2_eff.drift)
    assert rep.status == "unstable" and rep.effective_criterion is False
    rep = classify_stability(EffectiveParams(5e-4).drift)
    assert rep.stable and rep.effective_criterion is True
    assert classify_stability(np.zeros((4, 4))).status == "marginal"
    assert classify_stability(build_full_drift(fig2)).effective_criterion is None


def test_steady_state_unstable(fig2):
    with pytest.raises(Unstable):
        steady_state(build_full_drift(fig2), build_diffusion(fig2))


def test_steady_state_matches_scipy_and_closed_form():
    ep = EffectiveParams(g_eff=5e-4, n_a=0.2)
    v = steady_state(ep.drift, ep.diffusion).v
    ref = linalg.solve_continuous_lyapunov(np.asarray(ep.drift), -np.asarray(ep.diffusion))
    assert np.allclose(v, ref, atol=1e-12)
    k = analytic_coefficients(ep)
    assert v[0, 0] == pytest.approx(k.c_a, rel=1e-10)
    assert v[0, 3] == pytest.approx(k.c, rel=1e-10)


@pytest.mark.parametrize("g, ratio", [(0.01, 0.5), (0.05, 0.9), (0.2, 0.99)])
def test_reservoir_closed_form(g, ratio):
    p = SystemParams(delta_a=1.0, delta_b=-1.0, g=g, G=ratio * g, kappa_m=1e-6)
    num = steady_state(build_reservoir_drift(p), build_diffusion(p)).v
    ana = reservoir_steady_elements(g, ratio * g, p.kappa_a, p.kappa_m).v
    assert np.max(np.abs(num - ana)) < 1e-10 * max(1.0, np.abs(ana).max())


def test_reservoir_regime():
    with pytest.raises(InvalidRegime):
        reservoir_steady_elements(0.1, 0.1, 1e-3, 1e-6)


def test_trajectory_csv(tmp_path, fig2):
    states = evolve_many(build_full_drift(fig2), build_diffusion(fig2), CovarianceState.vacuum(),
                         [0.0, 10.0])
    lines = write_trajectory_csv(states, tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,V11,V14,V44,V15,V55"
    assert lines[1].startswith("0,0.5,0,0.5,0,0.5")
    assert len(lines) == 3
