"""Drift and diffusion matrices for the full, effective and reservoir models.

Quadrature ordering is pinned: the full basis is
``(X_a, Y_a, X_b, Y_b, X_m, Y_m)`` and the effective basis is its first four
entries.  Coupling phases are absorbed into the quadrature definitions, so
none of the builders read ``theta_a`` or ``theta_b``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch
from .model import OMEGA_M, SystemParams

FULL_BASIS = ("X_a", "Y_a", "X_b", "Y_b", "X_m", "Y_m")
EFFECTIVE_BASIS = FULL_BASIS[:4]
PHOTONIC = slice(0, 4)


def basis_for(n: int) -> tuple[str, ...]:
    if n == 6:
        return FULL_BASIS
    if n == 4:
        return EFFECTIVE_BASIS
    raise DimensionMismatch(f"no quadrature basis of size {n}")


@dataclass(frozen=True, eq=False)
class _LabeledMatrix:
    entries: np.ndarray
    basis: tuple[str, ...]

    def __post_init__(self):
        a = np.array(self.entries)
        if np.iscomplexobj(a):
            if np.max(np.abs(a.imag), initial=0.0) > 1e-15:
                raise ValueError("matrix has a non-negligible imaginary part")
            a = a.real
        a = a.astype(float)
        n = len(self.basis)
        if a.shape != (n, n):
            raise DimensionMismatch(f"shape {a.shape} does not match basis of size {n}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def n(self) -> int:
        return len(self.basis)

    def index(self, label: str) -> int:
        return self.basis.index(label)

    def __getitem__(self, labels):
        r, c = labels
        return self.entries[self.index(r), self.index(c)]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


class DriftMatrix(_LabeledMatrix):
    """Real drift matrix ``A`` of ``dV/dt = A V + V A^T + D``."""


class DiffusionMatrix(_LabeledMatrix):
    """Diagonal noise matrix ``D``."""


@dataclass(frozen=True)
class ErrorCoeffs:
    """Fractional systematic errors on the couplings (``gamma``) and detunings (``eta``)."""

    gamma: float = 0.0
    eta: float = 0.0

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "eta": self.eta}


def build_script_L(p: SystemParams) -> np.ndarray:
    """Complex 6x6 transition matrix of the Heisenberg equations, ``du/dt = i L u``."""
    da, db, g, G, wm = p.delta_a, p.delta_b, p.g, p.G, OMEGA_M
    m = np.array([
        [0.0, -da, 0.0, 0.0, 0.0, 0.0],
        [da, 0.0, 0.0, 0.0, 2 * g, 0.0],
        [0.0, 0.0, 0.0, -db, 0.0, 0.0],
        [0.0, 0.0, db, 0.0, 2 * G, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -wm],
        [2 * g, 0.0, 2 * G, 0.0, wm, 0.0],
    ])
    return 1j * m


def decay_matrix(p: SystemParams) -> np.ndarray:
    return np.diag([p.kappa_a, p.kappa_a, p.kappa_b, p.kappa_b, p.kappa_m, p.kappa_m])


def build_full_drift(p: SystemParams) -> DriftMatrix:
    """``A = i L - diag(kappa)`` for the linearized three-mode model."""
    a = 1j * build_script_L(p) - decay_matrix(p)
    return DriftMatrix(a, FULL_BASIS)


def build_eff_drift(g_eff: float, kappa_a: float, kappa_b: float) -> DriftMatrix:
    """4x4 drift of the two-photon squeezing model (symmetric, negative diagonal)."""
    a = -np.array([
        [kappa_a, 0.0, 0.0, g_eff],
        [0.0, kappa_a, g_eff, 0.0],
        [0.0, g_eff, kappa_b, 0.0],
        [g_eff, 0.0, 0.0, kappa_b],
    ])
    return DriftMatrix(a, EFFECTIVE_BASIS)


def build_reservoir_drift(p: SystemParams) -> DriftMatrix:
    """Rotating-wave drift of the reservoir-engineering baseline.

    Meant for ``delta_a = omega_m``, ``delta_b = -omega_m``; the detunings are
    not read because the rotating-wave Hamiltonian no longer contains them.
    """
    ka, kb, km, g, G = p.kappa_a, p.kappa_b, p.kappa_m, p.g, p.G
    a = np.array([
        [-ka, 0.0, 0.0, 0.0, 0.0, g],
        [0.0, -ka, 0.0, 0.0, -g, 0.0],
        [0.0, 0.0, -kb, 0.0, 0.0, -G],
        [0.0, 0.0, 0.0, -kb, -G, 0.0],
        [0.0, g, 0.0, -G, -km, 0.0],
        [-g, 0.0, -G, 0.0, 0.0, -km],
    ])
    return DriftMatrix(a, FULL_BASIS)


def build_diffusion(p: SystemParams, basis: str = "full") -> DiffusionMatrix:
    d = [p.kappa_a * (2 * p.n_a + 1)] * 2 + [p.kappa_b * (2 * p.n_b + 1)] * 2
    if basis == "full":
        d += [p.kappa_m * (2 * p.n_m + 1)] * 2
        return DiffusionMatrix(np.diag(d), FULL_BASIS)
    if basis == "effective":
        return DiffusionMatrix(np.diag(d), EFFECTIVE_BASIS)
    raise ValueError(f"basis must be 'full' or 'effective', got {basis!r}")


def apply_systematic_error(p: SystemParams, e: ErrorCoeffs) -> SystemParams:
    """Parameters realizing ``H + gamma H_g + eta H_Delta``.

    ``H_g`` adds ``+g`` to the a-coupling and ``-G`` to the b-coupling;
    ``H_Delta`` adds ``+delta_a`` and ``-delta_b``.
    """
    return p.replace(g=p.g * (1 + e.gamma), G=p.G * (1 - e.gamma),
                     delta_a=p.delta_a * (1 + e.eta), delta_b=p.delta_b * (1 - e.eta))


def write_matrix_csv(m: _LabeledMatrix | np.ndarray, path, basis=None) -> Path:
    """Row-major CSV with the basis labels as the header row."""
    a = np.asarray(m, dtype=float)
    labels = basis or getattr(m, "basis", None) or basis_for(a.shape[0])
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(labels)
        for row in a:
            w.writerow([format(float(x), ".17g") for x in row])
    return path


def read_matrix_csv(path, kind=DriftMatrix):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    basis = tuple(rows[0])
    a = np.array([[float(x) for x in r] for r in rows[1:]])
    return kind(a, basis)
