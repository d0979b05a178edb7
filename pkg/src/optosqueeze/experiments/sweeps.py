"""Per-cell computations and the systematic-error, thermal and reservoir sweeps.

Every cell function is a module-level pure function of picklable arguments so
that a process pool's ``map`` can stand in for the builtin one.  Failures
inside a cell become NaN values with a status string instead of aborting.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..dynamics import (CovarianceState, EffectiveParams, evolve,
                        steady_state)
from ..errors import InvalidRegime, NonFiniteResult, NonPositiveVariance, OptoSqueezeError, Unstable
from ..matrices import (ErrorCoeffs, apply_systematic_error, build_diffusion, build_full_drift,
                        build_reservoir_drift)
from ..model import OMEGA_M, SystemParams
from ..squeezing import (QuadratureSpec, anti_level, optimal_angle, optimize_quadrature, squeezing_level,
                         tau, variance_from_cm, variance_X_phi)
from .config import RunConfig

NAN = math.nan

LEVEL_COLUMNS = ("t", "dX_eff", "S_eff", "dX", "S_lin", "dX_tilde", "S_tilde_lin", "dY", "S_anti_lin",
                 "phi1", "phi2", "phi3")


def _db(fn, x) -> float:
    try:
        return fn(x)
    except (NonPositiveVariance, ValueError):
        return NAN


def initial_full_state(p: SystemParams, initial_state: str) -> CovarianceState:
    """Vacuum everywhere, or thermal photons with the phonon in its vacuum."""
    if initial_state == "vacuum":
        return CovarianceState.vacuum(6)
    return CovarianceState.thermal([p.n_a, p.n_b, 0.0])


@dataclass(frozen=True)
class LevelCell:
    """Full-model squeezing along ``times`` for one parameter point.

    ``ideal`` fixes the measured quadrature (optimal angle of the
    effective model) and the analytic reference; ``errors`` perturbs only
    the dynamics.
    """

    ideal: SystemParams
    times: tuple[float, ...]
    errors: ErrorCoeffs = ErrorCoeffs()
    initial_state: str = "vacuum"


def level_cell(cell: LevelCell) -> tuple[str, list[list[float]]]:
    """Rows of :data:`LEVEL_COLUMNS`; status ``ok``, ``unstable`` or ``missing``."""
    try:
        ep = EffectiveParams.from_system(cell.ideal)
        phi = optimal_angle(ep.g_eff, ep.kappa_a, ep.kappa_b)
        p = apply_systematic_error(cell.ideal, cell.errors)
        a, d = np.asarray(build_full_drift(p)), np.asarray(build_diffusion(p))
        v0 = initial_full_state(cell.ideal, cell.initial_state)
        with np.errstate(over="ignore", invalid="ignore"):
            eff = np.asarray(variance_X_phi(ep, phi, np.asarray(cell.times)), dtype=float)
    except (OptoSqueezeError, ValueError, ArithmeticError):
        return "missing", [[t] + [NAN] * (len(LEVEL_COLUMNS) - 1) for t in cell.times]
    x_spec, y_spec = QuadratureSpec.two_mode(phi), QuadratureSpec.anti_two_mode(phi)
    status, rows = "ok", []
    for t, dxe in zip(cell.times, eff):
        try:
            v = evolve(a, d, v0, t)
        except NonFiniteResult:
            status = "unstable"
            rows.append([t, dxe, _db(squeezing_level, dxe)] + [NAN] * (len(LEVEL_COLUMNS) - 3))
            continue
        dx, dy = variance_from_cm(v, x_spec), variance_from_cm(v, y_spec)
        best = optimize_quadrature(v)
        if not (dx > 0 and best.delta_x > 0):
            status = "missing"
        rows.append([t, dxe, _db(squeezing_level, dxe), dx, _db(squeezing_level, dx),
                     best.delta_x, _db(squeezing_level, best.delta_x), dy, _db(anti_level, dy),
                     *best.spec.angles])
    return status, rows


def cell_tau(p: SystemParams) -> float:
    return tau(EffectiveParams.from_system(p))


def grid_cells(cfg: RunConfig) -> list[dict]:
    """Cartesian product of the config's sweep axes (a single empty cell if none)."""
    names = [a.name for a in cfg.sweep]
    return [dict(zip(names, vals)) for vals in itertools.product(*(a.values for a in cfg.sweep))]


def run_levels(cfg: RunConfig, map_fn: Callable = map, times: Sequence[float] | None = None,
               tau_fractions: Sequence[float] | None = None):
    """Squeezing trajectories over every sweep cell of ``cfg``.

    Returns ``(header, rows, statuses)``; sweep axis values lead each row.
    Times come from ``cfg.times`` resolved against each cell's own ``tau``
    unless overridden.
    """
    names = [a.name for a in cfg.sweep]
    cells, jobs = grid_cells(cfg), []
    for over in cells:
        system, _, err = cfg.cell(over)
        tc = cell_tau(system)
        if times is not None:
            ts = tuple(float(t) for t in times)
        elif tau_fractions is not None:
            ts = tuple(float(f * tc) for f in tau_fractions)
        else:
            ts = tuple(float(t) for t in cfg.times.resolve(tc))
        jobs.append(LevelCell(system, ts, err, cfg.initial_state))
    results = list(map_fn(level_cell, jobs))
    rows, statuses = [], []
    for over, (status, cell_rows) in zip(cells, results):
        statuses.append(status)
        rows += [[over[n] for n in names] + r for r in cell_rows]
    return names + list(LEVEL_COLUMNS), rows, statuses


# ---------------------------------------------------------------------------
# systematic errors


def sweep_systematic(cfg: RunConfig, gamma_range: Sequence[float] = (0.0,),
                     eta_range: Sequence[float] = (0.0,), map_fn: Callable = map):
    """``S_lin(tau)`` and ``S~_lin(tau)`` over sweep cells x ``gamma`` x ``eta``.

    ``tau`` and the measured quadrature come from the error-free parameters.
    """
    names = [a.name for a in cfg.sweep]
    keys, jobs = [], []
    for over in grid_cells(cfg):
        system, _, _ = cfg.cell(over)
        tc = cell_tau(system)
        for gamma, eta in itertools.product(gamma_range, eta_range):
            keys.append([over[n] for n in names] + [float(gamma), float(eta), tc])
            jobs.append(LevelCell(system, (tc,), ErrorCoeffs(float(gamma), float(eta)),
                                  cfg.initial_state))
    header = names + ["gamma", "eta", "tau", "S_eff", "S_lin", "S_tilde_lin", "status"]
    rows, statuses = [], []
    for key, (status, (r,)) in zip(keys, map_fn(level_cell, jobs)):
        statuses.append(status)
        rows.append(key + [r[2], r[4], r[6], status])
    return header, rows, statuses


# ---------------------------------------------------------------------------
# temperature


THERMAL_FRACTIONS = (0.5, 1.0, 1.5)


def sweep_thermal(cfg: RunConfig, temps_k: Sequence[float], map_fn: Callable = map):
    """``S_lin`` at ``tau/2, tau, 3 tau/2`` per temperature.

    Occupations follow the Bose factor at each temperature; photons start
    thermal and the phonon starts in its vacuum.
    """
    if cfg.physical is None:
        from ..model import PhysicalParams
        cfg = cfg.replace(physical=PhysicalParams())
    cfg = cfg.replace(initial_state="thermal_photons")
    keys, jobs = [], []
    for temp in temps_k:
        system, _, err = cfg.cell({"physical.temp_k": float(temp)})
        tc = cell_tau(system)
        keys.append([float(temp), system.n_a, system.n_b, system.n_m, tc])
        jobs.append(LevelCell(system, tuple(f * tc for f in THERMAL_FRACTIONS), err,
                              cfg.initial_state))
    header = ["temp_k", "n_a", "n_b", "n_m", "tau", "S_lin_half_tau", "S_lin_tau",
              "S_lin_3half_tau", "S_tilde_lin_tau", "S_eff_tau", "status"]
    rows, statuses = [], []
    for key, (status, r) in zip(keys, map_fn(level_cell, jobs)):
        statuses.append(status)
        rows.append(key + [r[0][4], r[1][4], r[2][4], r[1][6], r[1][2], status])
    return header, rows, statuses


# ---------------------------------------------------------------------------
# reservoir-engineering baseline

_X_SUM = QuadratureSpec(np.array([1.0, 0.0, 1.0, 0.0]) / math.sqrt(2))
_Y_SUM = QuadratureSpec(np.array([0.0, 1.0, 0.0, 1.0]) / math.sqrt(2))


def reservoir_cell(args) -> tuple[str, float, float, float, float]:
    """``(status, dX, S, dY, S')`` of the steady reservoir-engineered state."""
    p, ratio = args
    try:
        if not ratio < 1:
            raise InvalidRegime("reservoir baseline needs G < g")
        q = p.replace(G=ratio * p.g, delta_a=OMEGA_M, delta_b=-OMEGA_M)
        v = steady_state(build_reservoir_drift(q), build_diffusion(q))
    except Unstable:
        return "unstable", NAN, NAN, NAN, NAN
    except (OptoSqueezeError, ValueError, ArithmeticError):
        return "missing", NAN, NAN, NAN, NAN
    dx, dy = variance_from_cm(v, _X_SUM), variance_from_cm(v, _Y_SUM)
    return "ok", dx, _db(squeezing_level, dx), dy, _db(anti_level, dy)


def baseline_reservoir(cfg: RunConfig, ratio_grid: Sequence[float], map_fn: Callable = map):
    """Steady squeezing ``S`` and anti-squeezing ``S'`` versus ``G/g``.

    Uses ``X = (X_a + X_b)/sqrt 2`` and ``Y = (Y_a + Y_b)/sqrt 2`` at
    ``delta_a = omega_m``, ``delta_b = -omega_m``.
    """
    names = [a.name for a in cfg.sweep]
    keys, jobs = [], []
    for over in grid_cells(cfg):
        system, _, _ = cfg.cell(over)
        for r in ratio_grid:
            keys.append([over[n] for n in names] + [system.g, float(r)])
            jobs.append((system, float(r)))
    header = names + ["g", "G_over_g", "dX", "S", "dY", "S_anti", "status"]
    rows, statuses = [], []
    for key, (status, *vals) in zip(keys, map_fn(reservoir_cell, jobs)):
        statuses.append(status)
        rows.append(key + list(vals) + [status])
    return header, rows, statuses

