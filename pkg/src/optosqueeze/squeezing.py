"""Quadrature variances, optimal measurement angles and squeezing levels."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .dynamics import CovarianceState, EffectiveParams, analytic_coefficients
from .errors import DegenerateAngleWarning, DimensionMismatch, NonPositiveVariance, ZeroReference

ZERO_POINT = 0.5


@dataclass(frozen=True, eq=False)
class QuadratureSpec:
    """Unit coefficient vector over ``(X_a, Y_a, X_b, Y_b)``.

    The angle form is
    ``(cos p3 cos p1, cos p3 sin p1, sin p3 cos p2, sin p3 sin p2)``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if w.shape != (4,):
            raise DimensionMismatch("quadrature needs 4 coefficients")
        norm = np.linalg.norm(w)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"coefficients must have unit norm, got {norm}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "coeffs", w)

    @classmethod
    def from_angles(cls, phi1: float, phi2: float, phi3: float) -> "QuadratureSpec":
        c3, s3 = math.cos(phi3), math.sin(phi3)
        return cls(np.array([c3 * math.cos(phi1), c3 * math.sin(phi1),
                             s3 * math.cos(phi2), s3 * math.sin(phi2)]))

    @classmethod
    def axis(cls, label: str) -> "QuadratureSpec":
        w = np.zeros(4)
        w[("X_a", "Y_a", "X_b", "Y_b").index(label)] = 1.0
        return cls(w)

    @classmethod
    def two_mode(cls, phi: float) -> "QuadratureSpec":
        """``cos(phi) X_a + sin(phi) Y_b``."""
        return cls(np.array([math.cos(phi), 0.0, 0.0, math.sin(phi)]))

    @classmethod
    def anti_two_mode(cls, phi: float) -> "QuadratureSpec":
        """``cos(phi) Y_a - sin(phi) X_b``, orthogonal to :meth:`two_mode`."""
        return cls(np.array([0.0, math.cos(phi), -math.sin(phi), 0.0]))

    @classmethod
    def misaligned(cls, phi: float, theta: float) -> "QuadratureSpec":
        """``cos(theta) X + sin(theta) Y`` for the pair built on ``phi``."""
        x = cls.two_mode(phi).coeffs
        y = cls.anti_two_mode(phi).coeffs
        return cls(math.cos(theta) * x + math.sin(theta) * y)

    @property
    def angles(self) -> tuple[float, float, float]:
        w1, w2, w3, w4 = self.coeffs
        phi3 = math.atan2(math.hypot(w3, w4), math.hypot(w1, w2))
        return math.atan2(w2, w1), math.atan2(w4, w3), phi3

    def normalized_sign(self) -> "QuadratureSpec":
        """Same quadrature with the first nonzero coefficient made positive."""
        w = self.coeffs
        nz = np.flatnonzero(np.abs(w) > 1e-15)
        if nz.size and w[nz[0]] < 0:
            return QuadratureSpec(-w)
        return self


@dataclass(frozen=True)
class SqueezeReport:
    delta_x: float
    level_db: float
    spec: QuadratureSpec
    t: float = 0.0

    @classmethod
    def from_variance(cls, delta_x: float, spec: QuadratureSpec, t: float = 0.0) -> "SqueezeReport":
        return cls(float(delta_x), squeezing_level(delta_x), spec, float(t))

    CSV_HEADER = ("t", "delta_x", "level_db", "phi1", "phi2", "phi3")

    def to_row(self) -> list[float]:
        return [self.t, self.delta_x, self.level_db, *self.spec.angles]

    def to_dict(self) -> dict:
        p1, p2, p3 = self.spec.angles
        return {"t": self.t, "delta_x": self.delta_x, "level_db": self.level_db,
                "phi1": p1, "phi2": p2, "phi3": p3, "coeffs": self.spec.coeffs.tolist()}


def optimal_angle(g_eff: float, kappa_a: float, kappa_b: float) -> float:
    """Angle of ``cos X_a + sin Y_b`` that cancels the diverging exponential.

    Returns ``atan2(2 g_eff, kappa_a - kappa_b) / 2``, which lies in
    ``(0, pi/2)`` for ``g_eff > 0``.  For ``g_eff < 0`` the value is negative;
    it is the cancelling angle modulo ``pi``, i.e. the same quadrature up to sign.
    With ``g_eff = 0`` and equal decays every angle is equivalent; ``pi/4`` is
    returned and a :class:`DegenerateAngleWarning` is emitted.
    """
    if g_eff == 0 and kappa_a == kappa_b:
        warnings.warn("optimal angle undefined for g_eff = 0 and equal decays; using pi/4",
                      DegenerateAngleWarning, stacklevel=2)
        return math.pi / 4
    return 0.5 * math.atan2(2.0 * g_eff, kappa_a - kappa_b)


def tau(ep: EffectiveParams) -> float:
    """Characteristic convergence time ``2 pi / (Omega + kappa_a + kappa_b)``."""
    rate = math.hypot(2 * ep.g_eff, ep.kappa_a - ep.kappa_b) + ep.kappa_a + ep.kappa_b
    if not rate > 0:
        raise ValueError("Omega + kappa_a + kappa_b must be positive")
    return 2 * math.pi / rate


def _cos2phi(ep: EffectiveParams, omega: float) -> float:
    return (ep.kappa_a - ep.kappa_b) / omega


def variance_X(ep: EffectiveParams, t):
    """Variance of the optimal two-mode quadrature (main-text form)."""
    omega = math.hypot(2 * ep.g_eff, ep.kappa_a - ep.kappa_b)
    if omega == 0:
        raise ValueError("Omega must be > 0")
    big_k = ep.kappa_a + ep.kappa_b
    c2 = _cos2phi(ep, omega)
    kp = ep.kappa_a * (2 * ep.n_a + 1) + ep.kappa_b * (2 * ep.n_b + 1)
    km = ep.kappa_a * (2 * ep.n_a + 1) - ep.kappa_b * (2 * ep.n_b + 1)
    n_p, n_m = ep.n_a + ep.n_b, ep.n_a - ep.n_b
    plateau = (kp + c2 * km) / (2 * (omega + big_k))
    c_minus = (n_p + 1 + c2 * n_m) / 4 - (kp + c2 * km) / (4 * (omega + big_k))
    return 2 * c_minus * np.exp(-(omega + big_k) * np.asarray(t, dtype=float)) + plateau


def variance_X_appendix(ep: EffectiveParams, t):
    """Same variance written with the appendix constants (independent bookkeeping)."""
    k = analytic_coefficients(ep)
    big_k = ep.kappa_a + ep.kappa_b
    c2 = math.cos(2 * k.phi_tilde)
    tail = (k.N_plus + 1 + c2 * k.N_minus) / 2 - 2 * k.C_minus
    return 2 * k.C_minus * np.exp(-(k.Omega + big_k) * np.asarray(t, dtype=float)) + tail


def variance_X_phi(ep: EffectiveParams, phi: float, t):
    """Variance of ``cos(phi) X_a + sin(phi) Y_b`` for an arbitrary angle."""
    k = analytic_coefficients(ep)
    big_k = ep.kappa_a + ep.kappa_b
    t = np.asarray(t, dtype=float)
    vt = k.varphi + 2 * phi
    c_phi = math.cos(phi) ** 2 * k.c_a + math.sin(phi) ** 2 * k.c_b + math.sin(2 * phi) * k.c
    return (k.C_plus * (1 - math.sin(vt)) * np.exp((k.Omega - big_k) * t)
            - k.C_zero * math.cos(vt) * np.exp(-big_k * t)
            + k.C_minus * (1 + math.sin(vt)) * np.exp(-(k.Omega + big_k) * t)
            + c_phi)


def variance_X_inf(ep: EffectiveParams) -> float:
    omega = math.hypot(2 * ep.g_eff, ep.kappa_a - ep.kappa_b)
    big_k = ep.kappa_a + ep.kappa_b
    kp = ep.kappa_a * (2 * ep.n_a + 1) + ep.kappa_b * (2 * ep.n_b + 1)
    km = ep.kappa_a * (2 * ep.n_a + 1) - ep.kappa_b * (2 * ep.n_b + 1)
    return (omega * kp + (ep.kappa_a - ep.kappa_b) * km) / (2 * omega * (omega + big_k))


def variance_Y(ep: EffectiveParams, t):
    """Variance of the anti-squeezed quadrature ``cos Y_a - sin X_b``."""
    k = analytic_coefficients(ep)
    big_k = ep.kappa_a + ep.kappa_b
    c2 = math.cos(2 * k.phi_tilde)
    grow = np.exp((k.Omega - big_k) * np.asarray(t, dtype=float))
    return 2 * k.C_plus * grow + (k.N_plus + 1 + c2 * k.N_minus) / 2 - 2 * k.C_plus


def _photonic(v) -> np.ndarray:
    a = v.v if isinstance(v, CovarianceState) else np.asarray(v, dtype=float)
    if a.shape == (6, 6):
        return a[:4, :4]
    if a.shape == (4, 4):
        return a
    raise DimensionMismatch(f"expected a 4x4 or 6x6 covariance, got {a.shape}")


def variance_from_cm(v, spec: QuadratureSpec) -> float:
    """``w^T V4 w`` with ``V4`` the photonic block."""
    w = spec.coeffs
    return float(w @ _photonic(v) @ w)


def optimize_quadrature(v) -> SqueezeReport:
    """Best photonic quadrature: the lowest eigenpair of the photonic block."""
    evals, evecs = np.linalg.eigh(_photonic(v))
    spec = QuadratureSpec(evecs[:, 0] / np.linalg.norm(evecs[:, 0])).normalized_sign()
    t = v.t if isinstance(v, CovarianceState) else 0.0
    return SqueezeReport.from_variance(float(evals[0]), spec, t)


def minimize_quadrature_angles(v, grid_deg: float = 2.0) -> tuple[float, QuadratureSpec]:
    """Direct three-angle minimization of the quadrature variance.

    A coarse grid seeds a BFGS refinement.  This is the verification route
    for :func:`optimize_quadrature` and shares no code with it.
    """
    m = _photonic(v)
    step = math.radians(grid_deg)
    p12 = np.arange(0.0, 2 * math.pi, step)
    p3 = np.arange(0.0, math.pi / 2 + step / 2, step)
    best = (math.inf, None)
    c1, s1 = np.cos(p12), np.sin(p12)
    for phi3 in p3:
        a = math.cos(phi3) * np.stack([c1, s1])          # (2, n1)
        b = math.sin(phi3) * np.stack([c1, s1])          # (2, n2)
        vals = (np.einsum("in,ij,jn->n", a, m[:2, :2], a)[:, None]
                + np.einsum("in,ij,jn->n", b, m[2:, 2:], b)[None, :]
                + 2 * np.einsum("in,ij,jm->nm", a, m[:2, 2:], b))
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[i, j] < best[0]:
            best = (vals[i, j], (p12[i], p12[j], phi3))

    def f(x):
        return variance_from_cm(m, QuadratureSpec.from_angles(*x))

    res = optimize.minimize(f, np.array(best[1]), method="BFGS", options={"gtol": 1e-12})
    spec = QuadratureSpec.from_angles(*res.x)
    return float(res.fun), spec


def squeezing_level(delta: float) -> float:
    """Squeezing in dB relative to the zero-point variance 1/2."""
    if not delta > 0:
        raise NonPositiveVariance(f"variance must be positive, got {delta}")
    return -10.0 * math.log10(delta / ZERO_POINT) + 0.0  # no negative zero


def anti_level(delta: float) -> float:
    if not delta > 0:
        raise NonPositiveVariance(f"variance must be positive, got {delta}")
    return 10.0 * math.log10(delta / ZERO_POINT)


def relative_sl_errors(s_lin: float, s_tilde_lin: float, s_eff: float) -> tuple[float, float]:
    """Relative deviations of two numeric squeezing levels (dB) from the effective one."""
    if s_eff == 0:
        raise ZeroReference("reference squeezing level is zero")
    return abs(s_lin - s_eff) / abs(s_eff), abs(s_tilde_lin - s_eff) / abs(s_eff)


def misalignment_variance(delta_x: float, delta_y: float, theta: float) -> float:
    """Variance of ``cos(theta) X + sin(theta) Y`` when ``X`` and ``Y`` are uncorrelated."""
    return math.cos(theta) ** 2 * delta_x + math.sin(theta) ** 2 * delta_y


def max_misalignment(delta_x: float, delta_y: float, bound: float = ZERO_POINT) -> float:
    """Largest ``|theta|`` keeping the misaligned variance below ``bound``.

    Returns 0 when ``delta_x`` already reaches the bound and ``pi/2`` when
    ``delta_y`` does not exceed it.
    """
    if delta_x >= bound:
        return 0.0
    if delta_y <= bound:
        return math.pi / 2
    return math.asin(math.sqrt((bound - delta_x) / (delta_y - delta_x)))
