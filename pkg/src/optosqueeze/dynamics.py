"""Covariance-matrix dynamics under ``dV/dt = A V + V A^T + D``.

Propagation is exact: the constant-coefficient Lyapunov flow is integrated
with one matrix exponential of the block matrix ``[[A, D], [0, -A^T]]``.  A
fixed-step RK4 path is kept only as an independent check of that route.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import (DegenerateCoupling, DimensionMismatch, InvalidRegime, NonFiniteResult,
                     StabilityPole, Unstable)
from .matrices import EFFECTIVE_BASIS, DiffusionMatrix, DriftMatrix, basis_for
from .model import SystemParams, effective_coupling

OVERFLOW_GUARD = 1e300
HURWITZ_TOL = 1e-12
STEADY_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CovarianceState:
    """Symmetric covariance matrix ``v`` at time ``t`` in the pinned quadrature basis."""

    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] not in (4, 6):
            raise DimensionMismatch(f"covariance must be 4x4 or 6x6, got {v.shape}")
        scale = max(1.0, float(np.max(np.abs(v))))
        if np.max(np.abs(v - v.T)) > 1e-12 * scale:
            raise ValueError("covariance matrix is not symmetric")
        v = 0.5 * (v + v.T)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def basis(self) -> tuple[str, ...]:
        return basis_for(self.v.shape[0])

    @property
    def photonic(self) -> np.ndarray:
        return self.v[:4, :4]

    def element(self, row: str, col: str) -> float:
        b = self.basis
        return float(self.v[b.index(row), b.index(col)])

    @classmethod
    def vacuum(cls, n: int = 6) -> "CovarianceState":
        return cls(np.eye(n) / 2)

    @classmethod
    def thermal(cls, occupations: Sequence[float]) -> "CovarianceState":
        """Diagonal thermal state, one occupation per mode (two quadratures each)."""
        d = np.repeat(np.asarray(occupations, dtype=float) + 0.5, 2)
        return cls(np.diag(d))


def _mat(m) -> np.ndarray:
    return np.asarray(m, dtype=float)


def _check_dims(a, d, v0):
    n = a.shape[0]
    if a.shape != (n, n) or d.shape != (n, n) or v0.shape != (n, n):
        raise DimensionMismatch(f"drift {a.shape}, diffusion {d.shape}, state {v0.shape}")


def _guard(v: np.ndarray, t: float) -> np.ndarray:
    if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > OVERFLOW_GUARD:
        raise NonFiniteResult(f"covariance overflowed at t = {t}")
    return 0.5 * (v + v.T)


def evolve(A, D, v0: CovarianceState, t: float) -> CovarianceState:
    """Exact covariance at time ``v0.t + t``.

    Uses ``exp([[A, D], [0, -A^T]] t) = [[F, H], [0, F^-T]]`` so that
    ``V(t) = F V0 F^T + H F^T``.
    """
    a, d, v = _mat(A), _mat(D), v0.v
    _check_dims(a, d, v)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return CovarianceState(v, v0.t)
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = a
    block[:n, n:] = d
    block[n:, n:] = -a.T
    with np.errstate(over="ignore", invalid="ignore"):
        e = scipy.linalg.expm(block * t)
        f, h = e[:n, :n], e[:n, n:]
        vt = f @ v @ f.T + h @ f.T
    return CovarianceState(_guard(vt, t), v0.t + t)


def evolve_many(A, D, v0: CovarianceState, times: Iterable[float],
                map_fn: Callable = map) -> list[CovarianceState]:
    """Evaluate :func:`evolve` independently at each time (order preserved)."""
    a, d = _mat(A), _mat(D)
    return list(map_fn(lambda t: evolve(a, d, v0, t), times))


def _rk4_step_operator(a: np.ndarray, d: np.ndarray, h: float) -> np.ndarray:
    """Affine one-step RK4 map for ``vec(V)`` as an augmented matrix.

    For the linear flow ``x' = K x + c`` an RK4 step is
    ``x + (hK + (hK)^2/2 + (hK)^3/6 + (hK)^4/24) x + h(1 + hK/2 + (hK)^2/6 + (hK)^3/24) c``.
    """
    n = a.shape[0]
    eye = np.eye(n)
    k = np.kron(eye, a) + np.kron(a, eye)
    hk = h * k
    m = n * n
    poly_x = np.eye(m)
    poly_c = np.eye(m)
    term = np.eye(m)
    for j in range(1, 5):
        term = term @ hk / j
        poly_x = poly_x + term
        if j < 4:
            poly_c = poly_c + term / (j + 1)
    step = np.eye(m + 1)
    step[:m, :m] = poly_x
    step[:m, m] = h * poly_c @ d.reshape(-1, order="F")
    return step


def evolve_rk4(A, D, v0: CovarianceState, t: float, steps: int | None = None,
               step_scale: float = 0.01) -> CovarianceState:
    """Fixed-step fourth-order Runge-Kutta solution (cross-check path).

    The default step keeps ``h * rho <= step_scale`` with ``rho`` the
    spectral radius of the vectorized generator.  The ``steps`` identical
    steps are composed by repeated squaring of the one-step map.
    """
    a, d, v = _mat(A), _mat(D), v0.v
    _check_dims(a, d, v)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return CovarianceState(v, v0.t)
    if steps is None:
        rho = 2.0 * float(np.max(np.abs(np.linalg.eigvals(a))))
        steps = max(1, math.ceil(t * rho / step_scale))
    step = _rk4_step_operator(a, d, t / steps)
    with np.errstate(over="ignore", invalid="ignore"):
        total = np.linalg.matrix_power(step, steps)
        x = np.append(v.reshape(-1, order="F"), 1.0)
        vt = (total @ x)[:-1].reshape(v.shape, order="F")
    return CovarianceState(_guard(vt, t), v0.t + t)


@dataclass(frozen=True)
class StabilityReport:
    status: str
    max_re_eig: float
    effective_criterion: bool | None = None

    @property
    def stable(self) -> bool:
        return self.status == "stable"


def classify_stability(A) -> StabilityReport:
    """Hurwitz classification with a ``1e-12`` marginal band.

    For an effective 4x4 drift the product criterion
    ``g_eff^2 < kappa_a kappa_b`` is reported alongside.
    """
    a = _mat(A)
    mx = float(np.max(np.linalg.eigvals(a).real))
    if mx < -HURWITZ_TOL:
        status = "stable"
    elif mx <= HURWITZ_TOL:
        status = "marginal"
    else:
        status = "unstable"
    crit = None
    if getattr(A, "basis", None) == EFFECTIVE_BASIS:
        g_eff, ka, kb = -a[0, 3], -a[0, 0], -a[2, 2]
        crit = bool(g_eff ** 2 < ka * kb)
    return StabilityReport(status, mx, crit)


def steady_state(A, D) -> CovarianceState:
    """Solve ``A V + V A^T + D = 0`` through the Kronecker-sum linear system.

    Raises
    ------
    Unstable
        If ``A`` is not Hurwitz; use :func:`evolve` at finite times instead.
    """
    a, d = _mat(A), _mat(D)
    n = a.shape[0]
    if a.shape != (n, n) or d.shape != (n, n):
        raise DimensionMismatch(f"drift {a.shape}, diffusion {d.shape}")
    rep = classify_stability(a)
    if not rep.stable:
        raise Unstable(f"drift is not Hurwitz (max Re eig = {rep.max_re_eig:.3e})")
    eye = np.eye(n)
    k = np.kron(eye, a) + np.kron(a, eye)
    v = np.linalg.solve(k, -d.reshape(-1, order="F")).reshape(n, n, order="F")
    v = 0.5 * (v + v.T)
    res = np.max(np.abs(a @ v + v @ a.T + d))
    if res > STEADY_RESIDUAL_TOL * max(1.0, float(np.max(np.abs(v)))):
        raise ArithmeticError(f"Lyapunov residual {res:.3e} exceeds tolerance")
    return CovarianceState(v, math.inf)


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class EffectiveParams:
    """Inputs of the two-photon squeezing model: coupling, decays and photon occupations."""

    g_eff: float
    kappa_a: float = 1e-3
    kappa_b: float = 1e-3
    n_a: float = 0.0
    n_b: float = 0.0

    @classmethod
    def from_system(cls, p: SystemParams) -> "EffectiveParams":
        g_eff, _ = effective_coupling(p)
        return cls(g_eff, p.kappa_a, p.kappa_b, p.n_a, p.n_b)

    @property
    def drift(self) -> DriftMatrix:
        from .matrices import build_eff_drift
        return build_eff_drift(self.g_eff, self.kappa_a, self.kappa_b)

    @property
    def diffusion(self) -> DiffusionMatrix:
        d = [self.kappa_a * (2 * self.n_a + 1)] * 2 + [self.kappa_b * (2 * self.n_b + 1)] * 2
        return DiffusionMatrix(np.diag(d), EFFECTIVE_BASIS)

    def initial_state(self) -> CovarianceState:
        return CovarianceState.thermal([self.n_a, self.n_b])


@dataclass(frozen=True)
class AnalyticCoefficients:
    Omega: float
    varphi: float
    phi_tilde: float
    C_plus: float
    C_minus: float
    C_zero: float
    kappa_plus: float
    kappa_minus: float
    N_plus: float
    N_minus: float
    c: float
    c_a: float
    c_b: float

    @property
    def sin_varphi(self) -> float:
        return math.sin(self.varphi)

    @property
    def cos_varphi(self) -> float:
        return math.cos(self.varphi)


def analytic_coefficients(ep: EffectiveParams) -> AnalyticCoefficients:
    """Constants of the closed-form effective covariance trajectory.

    ``varphi`` is fixed by ``cos = 2 g_eff / Omega`` and
    ``sin = (kappa_a - kappa_b) / Omega``.
    """
    g, ka, kb, na, nb = ep.g_eff, ep.kappa_a, ep.kappa_b, ep.n_a, ep.n_b
    big_k = ka + kb
    omega = math.hypot(2 * g, ka - kb)
    if omega == 0:
        raise DegenerateCoupling("g_eff = 0 with equal decays: closed form is degenerate")
    pole = g * g - ka * kb
    if pole == 0 or abs(pole) <= 1e-15 * ka * kb:
        raise StabilityPole("g_eff^2 = kappa_a kappa_b: steady constants diverge")
    sphi, cphi = (ka - kb) / omega, 2 * g / omega
    kp = ka * (2 * na + 1) + kb * (2 * nb + 1)
    km = ka * (2 * na + 1) - kb * (2 * nb + 1)
    n_p, n_m = na + nb, na - nb
    c0 = cphi / 2 * (km / big_k - n_m)
    c_plus = (kp - sphi * km) / (4 * (omega - big_k)) + (n_p - sphi * n_m + 1) / 4
    c_minus = -(kp + sphi * km) / (4 * (omega + big_k)) + (n_p + sphi * n_m + 1) / 4
    c = g * ka * kb * (na + nb + 1) / (pole * big_k)
    from .squeezing import optimal_angle
    return AnalyticCoefficients(
        Omega=omega, varphi=math.atan2(sphi, cphi), phi_tilde=optimal_angle(g, ka, kb),
        C_plus=c_plus, C_minus=c_minus, C_zero=c0,
        kappa_plus=kp, kappa_minus=km, N_plus=n_p, N_minus=n_m,
        c=c, c_a=na + 0.5 - g / ka * c, c_b=nb + 0.5 - g / kb * c,
    )


def analytic_eff_elements(ep: EffectiveParams, t, coeffs: AnalyticCoefficients | None = None):
    """``(V11, V44, V14)`` of the effective model at time(s) ``t`` (vectorized)."""
    k = coeffs or analytic_coefficients(ep)
    t = np.asarray(t, dtype=float)
    big_k = ep.kappa_a + ep.kappa_b
    s, c = k.sin_varphi, k.cos_varphi
    grow = np.exp((k.Omega - big_k) * t)
    mid = np.exp(-big_k * t)
    fast = np.exp(-(k.Omega + big_k) * t)
    v11 = k.C_plus * (1 - s) * grow - k.C_zero * c * mid + k.C_minus * (1 + s) * fast + k.c_a
    v44 = k.C_plus * (1 + s) * grow + k.C_zero * c * mid + k.C_minus * (1 - s) * fast + k.c_b
    v14 = -k.C_plus * c * grow + k.C_zero * s * mid + k.C_minus * c * fast + k.c
    return v11, v44, v14


def analytic_eff_cm(ep: EffectiveParams, t: float) -> CovarianceState:
    """Closed-form 4x4 covariance from the diagonal thermal initial state."""
    with np.errstate(over="ignore", invalid="ignore"):
        v11, v44, v14 = (float(x) for x in analytic_eff_elements(ep, t))
    v = np.array([
        [v11, 0.0, 0.0, v14],
        [0.0, v11, v14, 0.0],
        [0.0, v14, v44, 0.0],
        [v14, 0.0, 0.0, v44],
    ])
    if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > OVERFLOW_GUARD:
        raise NonFiniteResult(f"closed form overflowed at t = {t}")
    return CovarianceState(v, t)


def reservoir_steady_elements(g: float, G: float, kappa_a: float,
                              kappa_m: float) -> CovarianceState:
    """Closed-form steady covariance of the rotating-wave reservoir model.

    Assumes ``kappa_b = kappa_a`` and zero bath occupations.
    """
    if not G < g:
        raise InvalidRegime(f"reservoir steady state needs G < g (got G={G}, g={g})")
    ka, km = kappa_a, kappa_m
    den = (ka + km) * (G**2 - g**2 - ka * km) * (G**2 - g**2 - 2 * ka * (ka + km))
    v11 = 0.5 + G**2 * g**2 * (km + 2 * ka) / den
    v33 = 0.5 + G**2 * (2 * (ka + km) * (g**2 + ka * km) - G**2 * km) / den
    v66 = 0.5 + G**2 * ka * (g**2 - G**2 + 2 * ka * (ka + km)) / den
    v13 = -G * g * (G**2 * ka + (g**2 + ka * km) * (ka + km)) / den
    # sign fixed by the drift itself; the printed closed form carries the opposite one
    v16 = g * G**2 * ka * (2 * ka + km) / den
    v36 = -G * (2 * ka * (ka + km) * (g**2 + ka * km) - G**2 * ka * km) / den
    v = np.diag([v11, v11, v33, v33, v66, v66])
    for (i, j), x in {(0, 2): v13, (1, 3): -v13, (0, 5): v16, (1, 4): -v16,
                      (2, 5): v36, (3, 4): v36}.items():
        v[i, j] = v[j, i] = x
    return CovarianceState(v, math.inf)


def write_trajectory_csv(states: Sequence[CovarianceState], path) -> Path:
    """Trajectory export: ``t, V11, V14, V44`` plus ``V15, V55`` for 6x6 states."""
    full = states[0].v.shape[0] == 6 if states else False
    header = ["t", "V11", "V14", "V44"] + (["V15", "V55"] if full else [])
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for s in states:
            row = [s.t, s.v[0, 0], s.v[0, 3], s.v[3, 3]]
            if full:
                row += [s.v[0, 4], s.v[4, 4]]
            w.writerow([format(float(x), ".17g") for x in row])
    return path
