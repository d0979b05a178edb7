"""Deviation measures shared by the property suite and the acceptance checks.

Each function takes one parameter draw and returns the largest absolute
disagreement between a production route and its independent oracle.
"""
import numpy as np

from optosqueeze.dynamics import (CovarianceState, EffectiveParams, analytic_eff_cm, evolve, evolve_rk4,
                                  reservoir_steady_elements, steady_state)
from optosqueeze.matrices import build_diffusion, build_full_drift, build_reservoir_drift
from optosqueeze.model import SystemParams
from optosqueeze.squeezing import (minimize_quadrature_angles, optimize_quadrature, tau, variance_X,
                                   variance_X_appendix)

TIME_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


def full_params(g, ratio, kappa_a, kappa_b, n_m) -> SystemParams:
    return SystemParams.two_photon_resonant(g=g, delta_b=1.0 + ratio * g, kappa_a=kappa_a,
                                            kappa_b=kappa_b, n_m=n_m)


def rk4_deviation(p: SystemParams) -> float:
    """Van Loan propagator vs fixed-step RK4 at several times up to ``tau``."""
    a, d = build_full_drift(p), build_diffusion(p)
    t_end = tau(EffectiveParams.from_system(p))
    v0 = CovarianceState.vacuum()
    return max(float(np.abs(evolve(a, d, v0, f * t_end).v - evolve_rk4(a, d, v0, f * t_end).v).max())
               for f in TIME_FRACTIONS)


def analytic_deviation(ep: EffectiveParams) -> float:
    """Closed-form effective trajectory vs numeric propagation of the 4x4 model."""
    t_end = tau(ep)
    return max(float(np.abs(analytic_eff_cm(ep, f * t_end).v
                            - evolve(ep.drift, ep.diffusion, ep.initial_state(), f * t_end).v).max())
               for f in TIME_FRACTIONS)


def reservoir_deviation(g, ratio, kappa_a, kappa_m) -> float:
    """Closed-form reservoir steady state vs the Kronecker Lyapunov solve (scaled)."""
    p = SystemParams(delta_a=1.0, delta_b=-1.0, g=g, G=ratio * g, kappa_a=kappa_a, kappa_b=kappa_a,
                     kappa_m=kappa_m, n_a=0.0, n_b=0.0, n_m=0.0)
    num = steady_state(build_reservoir_drift(p), build_diffusion(p)).v
    ana = reservoir_steady_elements(g, ratio * g, kappa_a, kappa_m).v
    # elements reach ~1e3 as G/g -> 1, so the gap is measured on the unit scale
    return float(np.abs(num - ana).max() / max(1.0, np.abs(ana).max()))


def forms_deviation(ep: EffectiveParams) -> float:
    """Main-text vs appendix bookkeeping of the optimal-quadrature variance."""
    ts = np.linspace(0.0, 1.5 * tau(ep), 31)
    return float(np.abs(variance_X(ep, ts) - variance_X_appendix(ep, ts)).max())


def random_pd(rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(4, 4))
    return m @ m.T + rng.uniform(0.05, 1.0) * np.eye(4)


def quadrature_deviation(v4: np.ndarray) -> float:
    """Eigen-minimum vs direct three-angle minimization."""
    return abs(optimize_quadrature(v4).delta_x - minimize_quadrature_angles(v4)[0])
