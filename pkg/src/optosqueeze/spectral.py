"""Spectral check of the effective two-photon coupling.

The transition matrix ``L`` of the Heisenberg equations is diagonalized along
a scan of ``delta_a``.  Near ``delta_a = -delta_b`` two photonic levels
attract and acquire imaginary parts; the largest imaginary part is the
numerical ``|g_eff|`` and its location gives the energy shift.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import AmbiguousTracking, NoSplittingFound, OptoSqueezeError
from .matrices import build_script_L
from .model import OMEGA_M, SystemParams, geff_and_shift

TIE_TOL = 1e-12
SPLIT_TOL = 1e-12
MECHANICAL_BAND = 0.05
GOLDEN_XTOL = 1e-10
MAX_HALVINGS = 12


@dataclass(frozen=True, eq=False)
class EigenBranch:
    """One continuity-matched eigenvalue of ``L`` along the scan."""

    branch_id: int
    scan_values: np.ndarray
    eigenvalues: np.ndarray

    @property
    def is_mechanical(self) -> bool:
        """Real part stays within 5% of ``+omega_m`` or ``-omega_m`` over the whole scan."""
        re = self.eigenvalues.real
        return bool(np.all(np.abs(np.abs(re) - OMEGA_M) <= MECHANICAL_BAND * OMEGA_M))

    @property
    def max_abs_imag(self) -> float:
        return float(np.max(np.abs(self.eigenvalues.imag)))


@dataclass(frozen=True)
class GeffExtraction:
    g_eff_num: float
    delta_num: float
    sigma: float
    g_eff_ana: float
    delta_ana: float

    def to_dict(self) -> dict:
        return dict(g_eff_num=self.g_eff_num, delta_num=self.delta_num, sigma=self.sigma,
                    g_eff_ana=self.g_eff_ana, delta_ana=self.delta_ana)


def spectrum(p: SystemParams, delta_a: float) -> np.ndarray:
    return np.linalg.eigvals(build_script_L(p.replace(delta_a=float(delta_a))))


def _match(prev: np.ndarray, pred: np.ndarray, cand: np.ndarray) -> np.ndarray | None:
    """Greedy nearest-neighbour assignment of ``cand`` to predicted branch values.

    Returns the permutation, or ``None`` when a tie between two distinct
    candidates cannot be broken.  A tie shared by two branches over the same
    two candidates is a branch point where two levels meet (real levels
    turning into a complex-conjugate pair, or back); the exchange is
    arbitrary there and is fixed by ordering: the branch with the larger
    previous ``(re, im)`` takes the candidate with the larger ``(im, re)``.
    """
    n = len(pred)
    dist = np.abs(pred[:, None] - cand[None, :])
    order = np.argsort(np.min(dist, axis=1), kind="stable")
    taken = np.zeros(n, dtype=bool)
    perm = np.full(n, -1)
    for b in order:
        if perm[b] >= 0:
            continue
        d = np.where(taken, np.inf, dist[b])
        j1, j2 = np.argsort(d, kind="stable")[:2]
        tied = np.isfinite(d[j2]) and abs(d[j1] - d[j2]) < TIE_TOL
        if tied and abs(cand[j1] - cand[j2]) > TIE_TOL:
            partners = [k for k in range(n) if k != b and perm[k] < 0
                        and abs(dist[k, j1] - dist[k, j2]) < TIE_TOL
                        and min(dist[k, j1], dist[k, j2]) <= np.min(np.where(taken, np.inf, dist[k]))]
            if not partners:
                return None
            k = partners[0]
            hi, lo = sorted((j1, j2), key=lambda j: (cand[j].imag, cand[j].real), reverse=True)
            b_first = (prev[b].real, prev[b].imag) >= (prev[k].real, prev[k].imag)
            perm[b], perm[k] = (hi, lo) if b_first else (lo, hi)
            taken[[j1, j2]] = True
            continue
        perm[b] = j1
        taken[j1] = True
    return perm


def _advance(p, x_prev, x_next, prev, prev2, depth=0):
    """Track from ``x_prev`` to ``x_next``; halve the step on ambiguity."""
    cand = spectrum(p, x_next)
    pred = prev if prev2 is None else prev + (prev - prev2[1]) * (
        (x_next - x_prev) / (x_prev - prev2[0]))
    perm = _match(prev, pred, cand)
    if perm is not None:
        return cand[perm]
    if depth >= MAX_HALVINGS:
        raise AmbiguousTracking(f"cannot match eigenvalues between delta_a = {x_prev} "
                                f"and {x_next}; refine the grid")
    mid = 0.5 * (x_prev + x_next)
    at_mid = _advance(p, x_prev, mid, prev, prev2, depth + 1)
    return _advance(p, mid, x_next, at_mid, (x_prev, prev), depth + 1)


def eigen_scan(p: SystemParams, grid: Sequence[float]) -> list[EigenBranch]:
    """Continuity-tracked spectrum of ``L`` along ``delta_a`` values in ``grid``.

    Raises
    ------
    AmbiguousTracking
        If two distinct eigenvalues stay equally close to a branch even after
        repeated halving of the step.
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("grid needs at least 3 points")
    if np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly increasing")
    first = spectrum(p, x[0])
    first = first[np.lexsort((first.imag, first.real))]
    rows = [first]
    hist = None
    for k in range(1, x.size):
        nxt = _advance(p, x[k - 1], x[k], rows[-1], hist)
        hist = (x[k - 1], rows[-1])
        rows.append(nxt)
    ev = np.array(rows)
    return [EigenBranch(i, x, ev[:, i]) for i in range(ev.shape[1])]


def _photonic_split(p: SystemParams, delta_a: float) -> float:
    ev = spectrum(p, delta_a)
    keep = np.abs(np.abs(ev.real) - OMEGA_M) > MECHANICAL_BAND * OMEGA_M
    return float(np.max(np.abs(ev[keep].imag), initial=0.0))


def default_grid(p: SystemParams, points: int = 801) -> np.ndarray:
    """Grid around ``-delta_b`` wide enough to bracket the attraction with margin."""
    g_eff, shift = geff_and_shift(p.g, p.G, p.delta_b)
    half = 6.0 * abs(shift) + 4.0 * abs(g_eff) + 1e-6
    return np.linspace(-p.delta_b - half, -p.delta_b + half, points)


def attracted_branches(branches: Sequence[EigenBranch]) -> list[EigenBranch]:
    """Non-mechanical branches whose imaginary part reaches the scan's maximum."""
    photonic = [b for b in branches if not b.is_mechanical]
    if not photonic:
        return []
    top = max(b.max_abs_imag for b in photonic)
    return [b for b in photonic if b.max_abs_imag >= top * (1 - 1e-9) and top > 0]


def extract_geff_numeric(p: SystemParams, grid: Sequence[float] | None = None) -> GeffExtraction:
    """Numerical ``|g_eff|`` and shift from the maximal level splitting.

    The coarse maximum on the tracked attracted branch is refined by a
    golden-section search between its neighbouring grid points.  The
    refinement objective is the largest imaginary part among the photonic
    eigenvalues, which all share one modulus in the attraction window.
    """
    g_ana, d_ana = geff_and_shift(p.g, p.G, p.delta_b)
    x = default_grid(p) if grid is None else np.asarray(grid, dtype=float)
    margin = 5.0 * abs(d_ana)
    if not (x[0] <= -p.delta_b - margin and x[-1] >= -p.delta_b + margin):
        raise ValueError(f"grid must bracket delta_a = {-p.delta_b} with margin {margin:.3g}")
    branches = eigen_scan(p, x)
    att = attracted_branches(branches)
    if not att or att[0].max_abs_imag < SPLIT_TOL:
        raise NoSplittingFound("no level attraction found on the scan")
    b = att[0]
    i = int(np.argmax(np.abs(b.eigenvalues.imag)))
    if i == 0 or i == x.size - 1:
        raise NoSplittingFound("splitting maximum sits on the grid edge; widen the grid")
    scale = max(abs(x[i]), 1.0)
    res = optimize.minimize_scalar(lambda d: -_photonic_split(p, d),
                                   bracket=(x[i - 1], x[i], x[i + 1]), method="golden",
                                   options={"xtol": GOLDEN_XTOL / (2 * scale)})
    g_num = -float(res.fun)
    if g_num < abs(b.eigenvalues.imag[i]):
        g_num, x_star = abs(float(b.eigenvalues.imag[i])), float(x[i])
    else:
        x_star = float(res.x)
    sigma = abs(g_num - abs(g_ana)) / abs(g_ana) if g_ana != 0 else math.nan
    return GeffExtraction(g_num, x_star + p.delta_b, sigma, g_ana, d_ana)


@dataclass(frozen=True, eq=False)
class SigmaMap:
    g: np.ndarray
    delta_b: np.ndarray
    sigma: np.ndarray
    g_eff_num: np.ndarray

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["g", "delta_b", "sigma", "g_eff_num"])
            for i, j in np.ndindex(self.sigma.shape):
                w.writerow([format(float(v), ".17g") for v in
                            (self.g[i], self.delta_b[i, j], self.sigma[i, j], self.g_eff_num[i, j])])
        return path


def _sigma_cell(args):
    g, delta_b = args
    if not delta_b > OMEGA_M + 2 * g:
        return math.nan, math.nan
    try:
        p = SystemParams(delta_a=-delta_b, delta_b=delta_b, g=g, G=g)
        ex = extract_geff_numeric(p)
    except (OptoSqueezeError, ValueError, np.linalg.LinAlgError):
        return math.nan, math.nan
    return ex.sigma, ex.g_eff_num


def sigma_map(g_values: Sequence[float], delta_b_values: Sequence[float] | None = None, *,
              ratios: Sequence[float] | None = None, map_fn: Callable = map) -> SigmaMap:
    """Relative coupling error over a ``(g, delta_b)`` grid with ``G = g``.

    Give either absolute ``delta_b_values`` or ``ratios`` of
    ``(delta_b - omega_m) / g``.  Cells outside ``delta_b > omega_m + 2 g`` or
    whose extraction fails are reported as NaN.
    """
    if (delta_b_values is None) == (ratios is None):
        raise ValueError("give exactly one of delta_b_values or ratios")
    g = np.asarray(g_values, dtype=float)
    if ratios is not None:
        db = OMEGA_M + np.outer(g, np.asarray(ratios, dtype=float))
    else:
        db = np.tile(np.asarray(delta_b_values, dtype=float), (g.size, 1))
    cells = [(g[i], db[i, j]) for i, j in np.ndindex(db.shape)]
    out = np.array(list(map_fn(_sigma_cell, cells)), dtype=float).reshape(*db.shape, 2)
    return SigmaMap(g, db, out[..., 0], out[..., 1])


def write_scan_csv(branches: Sequence[EigenBranch], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta_a", "branch_id", "re_lambda", "im_lambda"])
        for k, x in enumerate(branches[0].scan_values):
            for b in branches:
                lam = b.eigenvalues[k]
                w.writerow([format(float(x), ".17g"), b.branch_id,
                            format(float(lam.real), ".17g"), format(float(lam.imag), ".17g")])
    return path
