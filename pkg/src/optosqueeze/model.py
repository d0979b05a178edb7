"""Physical parameters, unit conventions and classical fixed points.

All model constants are dimensionless in units of the mechanical frequency
(``OMEGA_M == 1``); time is measured in ``1/OMEGA_M``.  Only
:class:`PhysicalParams` carries SI units (Hz and K), and its frequencies are
ordinary frequencies ``omega / 2 pi``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy import constants

from .errors import ConfigError, InvalidRatio, NonConvergence, SingularDetuning

OMEGA_M = 1.0

# exp(x) - 1 overflows near x = 709; the occupation is zero to double precision far earlier
_EXPONENT_CUTOFF = 700.0
_POLE_TOL = 1e-12


def _check_keys(cls, data: Mapping[str, Any]) -> None:
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")


@dataclass(frozen=True)
class SystemParams:
    """Normalized constants of the linearized three-mode model.

    Parameters
    ----------
    delta_a, delta_b : float
        Photon detunings.
    g, G : float
        Driving-enhanced couplings of modes a and b to the phonon.
    kappa_a, kappa_b, kappa_m : float
        Amplitude decay rates.
    n_a, n_b, n_m : float
        Bath thermal occupations.
    theta_a, theta_b : float
        Coupling phases.  They are absorbed into the quadrature definitions
        and never enter the drift matrices.
    """

    delta_a: float
    delta_b: float
    g: float
    G: float
    kappa_a: float = 1e-3
    kappa_b: float = 1e-3
    kappa_m: float = 1e-6
    n_a: float = 0.0
    n_b: float = 0.0
    n_m: float = 0.0
    theta_a: float = 0.0
    theta_b: float = 0.0

    def __post_init__(self):
        for name in ("kappa_a", "kappa_b", "kappa_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("g", "G", "n_a", "n_b", "n_m"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @classmethod
    def two_photon_resonant(cls, g: float = 0.1, G: float | None = None,
                            delta_b: float | None = None, **kwargs) -> "SystemParams":
        """Parameters on the squeezing resonance ``delta_a = -delta_b + shift``.

        ``G`` defaults to ``g`` and ``delta_b`` to ``OMEGA_M + 10 g``; the
        remaining keywords go straight to the constructor.
        """
        G = g if G is None else G
        delta_b = OMEGA_M + 10.0 * g if delta_b is None else delta_b
        _, shift = geff_and_shift(g, G, delta_b)
        return cls(delta_a=-delta_b + shift, delta_b=delta_b, g=g, G=G, **kwargs)

    @classmethod
    def fig2(cls, **overrides) -> "SystemParams":
        """The reference working point used by most figures (``N_m = 10``)."""
        kw = dict(g=0.1, kappa_a=1e-3, kappa_b=1e-3, kappa_m=1e-6,
                  n_a=0.0, n_b=0.0, n_m=10.0)
        kw.update(overrides)
        return cls.two_photon_resonant(**kw)

    @property
    def effective_valid(self) -> bool:
        """Whether the point lies in the region where the two-photon model is trusted.

        Exposed for reporting only; nothing downstream refuses to run outside it.
        """
        return (abs(self.delta_b - OMEGA_M) >= 8.0 * self.g
                and 0.1 <= self.g <= 0.2)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemParams":
        """Build from a config block.

        A missing or null ``delta_a`` places the point on the squeezing
        resonance for the given ``delta_b``.
        """
        _check_keys(cls, data)
        data = {k: v for k, v in data.items()}
        if data.get("delta_a") is None:
            data.pop("delta_a", None)
            g = data.pop("g")
            return cls.two_photon_resonant(g=g, **data)
        return cls(**data)


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory frequencies (Hz, as ``omega / 2 pi``) and bath temperature (K)."""

    omega_a_hz: float = 10e9
    omega_b_hz: float = 10e9
    omega_m_hz: float = 10e6
    temp_k: float = 0.01

    def __post_init__(self):
        for name in ("omega_a_hz", "omega_b_hz", "omega_m_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.temp_k >= 0:
            raise ValueError("temp_k must be >= 0")

    def occupations(self) -> tuple[float, float, float]:
        """Bath occupations ``(n_a, n_b, n_m)`` at ``temp_k``."""
        return (thermal_occupation(self.omega_a_hz, self.temp_k),
                thermal_occupation(self.omega_b_hz, self.temp_k),
                thermal_occupation(self.omega_m_hz, self.temp_k))

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PhysicalParams":
        _check_keys(cls, data)
        return cls(**data)


@dataclass(frozen=True)
class DriveParams:
    """Single-photon couplings, drive Rabi frequencies and detunings (units of omega_m)."""

    g_a: float
    g_b: float
    rabi_a: float
    rabi_b: float
    delta_a: float
    delta_b: float

    def __post_init__(self):
        if self.g_a < 0 or self.g_b < 0:
            raise ValueError("single-photon couplings must be >= 0")


@dataclass(frozen=True)
class ClassicalAmplitudes:
    alpha: complex
    beta: complex
    M: complex
    residual: float = field(default=0.0, compare=False)
    iterations: int = field(default=0, compare=False)


def thermal_occupation(freq_hz: float, temp_k: float) -> float:
    """Bose-Einstein occupation of a mode at ordinary frequency ``freq_hz``.

    Returns exactly 0 at zero temperature and whenever ``h f / k T`` is so
    large that the occupation underflows.
    """
    if not freq_hz > 0:
        raise ValueError("freq_hz must be > 0")
    if temp_k < 0:
        raise ValueError("temp_k must be >= 0")
    if temp_k == 0:
        return 0.0
    x = constants.h * freq_hz / (constants.k * temp_k)
    if x > _EXPONENT_CUTOFF:
        return 0.0
    return 1.0 / math.expm1(x)


def _phase(z: complex) -> float:
    # canonical phase for a vanishing amplitude
    return 0.0 if z == 0 else float(np.angle(z))


def _fixed_point_map(z, dp: DriveParams, kappa_a, kappa_b, kappa_m, omega_m):
    alpha, beta, M = z
    # stationary point of the mean-field equations; the photon detuning is
    # shifted by the static mechanical displacement 2 g_o Re(M)
    shift_a = 2.0 * dp.g_a * M.real
    shift_b = 2.0 * dp.g_b * M.real
    den_a = dp.delta_a - 1j * kappa_a + shift_a
    den_b = dp.delta_b - 1j * kappa_b + shift_b
    new_alpha = -dp.rabi_a / den_a if dp.rabi_a else 0j
    new_beta = -dp.rabi_b / den_b if dp.rabi_b else 0j
    new_M = -(dp.g_a * abs(alpha) ** 2 + dp.g_b * abs(beta) ** 2) / (omega_m - 1j * kappa_m)
    return np.array([new_alpha, new_beta, new_M])


def classical_amplitudes(dp: DriveParams, kappa_a: float, kappa_b: float, kappa_m: float,
                         omega_m: float = OMEGA_M, damping: float = 0.5,
                         tol: float = 1e-10, max_iter: int = 10_000) -> ClassicalAmplitudes:
    """Solve the mean-field fixed point ``(alpha, beta, M)`` by damped iteration.

    The iteration starts from the weak-backaction guess
    ``alpha = -rabi_a / delta_a``, ``beta = -rabi_b / delta_b`` and stops once
    the fixed-point residual drops below ``tol``.

    Raises
    ------
    NonConvergence
        If ``max_iter`` iterations do not reach ``tol``; this usually means the
        drive is outside the weak-backaction regime (bistability).
    """
    for rabi, det, name in ((dp.rabi_a, dp.delta_a, "a"), (dp.rabi_b, dp.delta_b, "b")):
        if rabi and det == 0:
            raise ValueError(f"mode {name} is driven on resonance (zero detuning)")
    args = (dp, kappa_a, kappa_b, kappa_m, omega_m)
    alpha0 = -dp.rabi_a / dp.delta_a if dp.rabi_a else 0.0
    beta0 = -dp.rabi_b / dp.delta_b if dp.rabi_b else 0.0
    z = np.array([alpha0, beta0, 0.0], dtype=complex)
    z[2] = _fixed_point_map(z, *args)[2]
    for it in range(1, max_iter + 1):
        fz = _fixed_point_map(z, *args)
        res = float(np.linalg.norm(fz - z))
        if res < tol:
            return ClassicalAmplitudes(complex(z[0]), complex(z[1]), complex(z[2]), res, it)
        z = (1.0 - damping) * z + damping * fz
    raise NonConvergence(f"fixed point not reached after {max_iter} iterations "
                         f"(residual {res:.3e})")


def fixed_point_residual(amps: ClassicalAmplitudes, dp: DriveParams, kappa_a: float,
                         kappa_b: float, kappa_m: float, omega_m: float = OMEGA_M) -> float:
    z = np.array([amps.alpha, amps.beta, amps.M])
    return float(np.linalg.norm(_fixed_point_map(z, dp, kappa_a, kappa_b, kappa_m, omega_m) - z))


def enhanced_couplings(dp: DriveParams, amps: ClassicalAmplitudes) -> tuple[float, float, float, float]:
    """Return ``(g, theta_a, G, theta_b)`` from ``g_a alpha`` and ``g_b beta``."""
    za = dp.g_a * amps.alpha
    zb = dp.g_b * amps.beta
    return abs(za), _phase(za), abs(zb), _phase(zb)


def geff_and_shift(g: float, G: float, delta_b: float,
                   omega_m: float = OMEGA_M) -> tuple[float, float]:
    """Mechanically mediated two-photon coupling and the matching energy shift."""
    den = delta_b ** 2 - omega_m ** 2
    if abs(den) < _POLE_TOL:
        raise SingularDetuning(f"delta_b = {delta_b} sits on the pole |delta_b| = omega_m")
    g_eff = 2.0 * omega_m * g * G / den
    shift = -2.0 * omega_m * (g ** 2 + G ** 2) / den
    return g_eff, shift


def effective_coupling(p: SystemParams) -> tuple[float, float]:
    """``(g_eff, delta)`` for the parameters' couplings and ``delta_b``."""
    return geff_and_shift(p.g, p.G, p.delta_b)


def bogoliubov_r(g: float, G: float) -> float:
    """Squeezing parameter of the reservoir-engineered Bogoliubov mode, ``artanh(G/g)``."""
    if G < 0 or g <= 0 or G >= g:
        raise InvalidRatio(f"need g > G >= 0, got g={g}, G={G}")
    return math.atanh(G / g)
