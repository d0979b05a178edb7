"""Figure-reproduction recipes: data files only, one manifest per run."""
from __future__ import annotations

import copy
from pathlib import Path
from typing import Callable

import numpy as np

from ..dynamics import EffectiveParams, analytic_eff_elements, evolve
from ..errors import NonFiniteResult, OptoSqueezeError, UnknownFigure
from ..matrices import build_diffusion, build_full_drift
from ..model import OMEGA_M, SystemParams, geff_and_shift
from ..spectral import SigmaMap, default_grid, eigen_scan, extract_geff_numeric, sigma_map
from .config import DEFAULT_CONFIG, RunConfig, load_config
from .io import RunManifest, write_table
from .sweeps import (baseline_reservoir, cell_tau, initial_full_state, run_levels, sweep_systematic,
                     sweep_thermal)

FIGURES = ("fig2a", "fig2b", "fig3", "fig4", "fig5", "figB", "figC1", "figC2")

# secondary grids that belong to a figure rather than to its base config
FIG3_G = (0.05, 0.1, 0.2, 0.25)
FIG3_CHECK_G = tuple(np.round(np.linspace(0.05, 0.25, 9), 6))
FIG3_SQUEEZE_FRACTIONS = (0.5, 1.0, 1.5)
FIG3_ANTI_FRACTIONS = (0.75, 1.0, 1.25)
FIG4_G = (0.05, 0.1, 0.15, 0.2)
FIG4_GAMMA = tuple(np.round(np.linspace(0.0, 0.2, 11), 6))
FIG4_ETA = tuple(np.round(np.linspace(0.0, 1e-3, 11), 9))
FIG4_DELTA_B = tuple(np.round(np.linspace(1.8, 2.2, 5), 6))
FIG5_TEMPS = (0.0, 0.02, 0.05, 0.1, 0.15, 0.2)
FIGB_G = (0.01, 0.02, 0.05)
FIGB_RATIOS = tuple(np.round(np.linspace(0.1, 0.99, 90), 6))
FIGC_G = tuple(np.round(np.linspace(0.05, 0.25, 9), 6))
FIGC_DELTA_B = (2.0, 3.0)
FIGC_RATIOS = (4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0)


def _base(**system) -> dict:
    d = copy.deepcopy(DEFAULT_CONFIG)
    d["system"].update(system)
    return d


FIGURE_DEFAULTS: dict[str, dict] = {
    "fig2a": _base(),
    "fig2b": _base(),
    "fig3": _base(),
    "fig4": _base(),
    "fig5": {**_base(), "physical": {"omega_a_hz": 10e9, "omega_b_hz": 10e9,
                                     "omega_m_hz": 10e6, "temp_k": 0.02},
             "initial_state": "thermal_photons"},
    "figB": _base(g=0.02, delta_a=OMEGA_M, delta_b=-OMEGA_M),
    "figC1": _base(delta_b=3.0, delta_a=-3.0, n_m=0.0),
    "figC2": _base(),
}


def figure_config(fig_id: str, overrides=()) -> RunConfig:
    if fig_id not in FIGURE_DEFAULTS:
        raise UnknownFigure(fig_id)
    return load_config(None, overrides, base=FIGURE_DEFAULTS[fig_id])


def _fig2a(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    p, _, _ = cfg.cell()
    ep = EffectiveParams.from_system(p)
    times = cfg.times.resolve(cell_tau(p))
    v11e, v44e, v14e = analytic_eff_elements(ep, times)
    a, d = np.asarray(build_full_drift(p)), np.asarray(build_diffusion(p))
    v0 = initial_full_state(p, cfg.initial_state)
    rows = []
    for t, x11, x44, x14 in zip(times, v11e, v44e, v14e):
        try:
            v = evolve(a, d, v0, t).v
            full = [v[0, 0], v[0, 3], v[3, 3], v[0, 4], v[4, 4]]
            man.record("ok")
        except NonFiniteResult:
            full = [np.nan] * 5
            man.record("unstable")
        rows.append([t, x11, x14, x44, *full])
    header = ["t", "V11_eff", "V14_eff", "V44_eff", "V11_full", "V14_full", "V44_full",
              "V15_full", "V55_full"]
    return write_table(out, "fig2a", header, rows, cfg.outputs.csv, cfg.outputs.json)


def _fig2b(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    _, rows, statuses = run_levels(cfg.replace(sweep=()), map_fn)
    for s in statuses:
        man.record(s)
    header = ["t", "dX_eff_analytic", "dX_full", "dXtilde_full", "S_eff", "S_lin", "S_tilde_lin"]
    picked = [[r[0], r[1], r[3], r[5], r[2], r[4], r[6]] for r in rows]
    return write_table(out, "fig2b", header, picked, cfg.outputs.csv, cfg.outputs.json)


def _with_g_axis(cfg: RunConfig, values) -> RunConfig:
    if cfg.sweep:
        return cfg
    from .config import SweepAxis
    return cfg.replace(sweep=(SweepAxis("g", tuple(float(v) for v in values)),))


def _fig3(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    files = []
    traj = _with_g_axis(cfg, FIG3_G)
    header, rows, st = run_levels(traj, map_fn)
    files += write_table(out, "fig3_trajectories", header, rows, cfg.outputs.csv, cfg.outputs.json)
    check = _with_g_axis(cfg, FIG3_CHECK_G)
    header, rows, st2 = run_levels(check, map_fn, tau_fractions=FIG3_SQUEEZE_FRACTIONS)
    n_ax = len(check.sweep)
    out_rows = []
    for r in rows:
        s_eff, s_lin, s_til = r[n_ax + 2], r[n_ax + 4], r[n_ax + 6]
        eps = abs(s_lin - s_eff) / abs(s_eff) if s_eff else np.nan
        eps_t = abs(s_til - s_eff) / abs(s_eff) if s_eff else np.nan
        out_rows.append(r[:n_ax + 1] + [s_eff, s_lin, s_til, eps, eps_t])
    files += write_table(out, "fig3_checkpoints",
                         header[:n_ax + 1] + ["S_eff", "S_lin", "S_tilde_lin", "epsilon",
                                              "epsilon_tilde"],
                         out_rows, cfg.outputs.csv, cfg.outputs.json)
    header, rows, st3 = run_levels(check, map_fn, tau_fractions=FIG3_ANTI_FRACTIONS)
    files += write_table(out, "fig3_anti", header[:n_ax + 1] + ["dX", "S_lin", "dY", "S_anti_lin"],
                         [r[:n_ax + 1] + [r[n_ax + 3], r[n_ax + 4], r[n_ax + 7], r[n_ax + 8]]
                          for r in rows], cfg.outputs.csv, cfg.outputs.json)
    for s in st + st2 + st3:
        man.record(s)
    return files


def _fig4(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    from .config import SweepAxis
    files = []
    by_g = cfg.replace(sweep=(SweepAxis("g", FIG4_G),))
    for stem, gam, eta in (("fig4_gamma", FIG4_GAMMA, (0.0,)), ("fig4_eta", (0.0,), FIG4_ETA)):
        header, rows, st = sweep_systematic(by_g, gam, eta, map_fn)
        files += write_table(out, stem, header, rows, cfg.outputs.csv, cfg.outputs.json)
        for s in st:
            man.record(s)
    by_db = cfg.replace(sweep=(SweepAxis("delta_b", FIG4_DELTA_B),))
    for stem, gam, eta in (("fig4_gamma_space", FIG4_GAMMA, (0.0,)),
                           ("fig4_eta_space", (0.0,), FIG4_ETA)):
        header, rows, st = sweep_systematic(by_db, gam, eta, map_fn)
        files += write_table(out, stem, header, rows, cfg.outputs.csv, cfg.outputs.json)
        for s in st:
            man.record(s)
    return files


def _fig5(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    files = []
    header, rows, st = sweep_thermal(cfg, FIG5_TEMPS, map_fn)
    files += write_table(out, "fig5_checkpoints", header, rows, cfg.outputs.csv, cfg.outputs.json)
    from .config import SweepAxis
    traj = cfg.replace(sweep=(SweepAxis("physical.temp_k", FIG5_TEMPS),),
                       initial_state="thermal_photons")
    if traj.physical is None:
        from ..model import PhysicalParams
        traj = traj.replace(physical=PhysicalParams())
    h2, rows2, st2 = run_levels(traj, map_fn)
    files += write_table(out, "fig5_trajectories", h2[:3] + ["dX"], [r[:3] + [r[4]] for r in rows2],
                         cfg.outputs.csv, cfg.outputs.json)
    for s in st + st2:
        man.record(s)
    return files


def _figB(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    from .config import SweepAxis
    c = cfg if cfg.sweep else cfg.replace(sweep=(SweepAxis("g", FIGB_G),))
    header, rows, st = baseline_reservoir(c, FIGB_RATIOS, map_fn)
    for s in st:
        man.record(s)
    return write_table(out, "figB", header, rows, cfg.outputs.csv, cfg.outputs.json)


def _figC1(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    p, _, _ = cfg.cell()
    branches = eigen_scan(p, default_grid(p))
    rows = []
    for k, x in enumerate(branches[0].scan_values):
        for b in branches:
            lam = b.eigenvalues[k] / OMEGA_M
            rows.append([x, b.branch_id, int(b.is_mechanical), lam.real, lam.imag])
    man.record("ok", len(branches))
    return write_table(out, "figC1", ["delta_a", "branch_id", "mechanical", "re_lambda", "im_lambda"],
                       rows, cfg.outputs.csv, cfg.outputs.json)


def _geff_cell(args):
    """``(sigma, |g_eff| numeric, delta numeric)`` at ``G = g``; NaN when extraction fails."""
    g, db = args
    try:
        ex = extract_geff_numeric(SystemParams(delta_a=-db, delta_b=db, g=g, G=g))
    except (OptoSqueezeError, ValueError, np.linalg.LinAlgError):
        return np.nan, np.nan, np.nan
    return ex.sigma, ex.g_eff_num, ex.delta_num


def _figC2(cfg: RunConfig, out: Path, man: RunManifest, map_fn):
    files = []
    rows = []
    cells = [(g, db) for db in FIGC_DELTA_B for g in FIGC_G]
    for (g, db), (sig, num, d_num) in zip(cells, map_fn(_geff_cell, cells)):
        ana, shift = geff_and_shift(g, g, db)
        rows.append([db, g, num, abs(ana), d_num, shift, sig])
        man.record("ok" if np.isfinite(sig) else "missing")
    files += write_table(out, "figC2_vs_g", ["delta_b", "g", "g_eff_num", "g_eff_ana", "delta_num",
                                             "delta_ana", "sigma"], rows,
                         cfg.outputs.csv, cfg.outputs.json)
    smap: SigmaMap = sigma_map(FIGC_G, ratios=FIGC_RATIOS, map_fn=map_fn)
    rows = []
    for i, j in np.ndindex(smap.sigma.shape):
        g, db = smap.g[i], smap.delta_b[i, j]
        rows.append([g, db, FIGC_RATIOS[j], smap.g_eff_num[i, j], abs(geff_and_shift(g, g, db)[0]),
                     smap.sigma[i, j]])
        man.record("ok" if np.isfinite(smap.sigma[i, j]) else "missing")
    files += write_table(out, "figC2_map", ["g", "delta_b", "ratio", "g_eff_num", "g_eff_ana", "sigma"],
                         rows, cfg.outputs.csv, cfg.outputs.json)
    return files


_RECIPES: dict[str, Callable] = {
    "fig2a": _fig2a, "fig2b": _fig2b, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5,
    "figB": _figB, "figC1": _figC1, "figC2": _figC2,
}


def run_figure(fig_id: str, cfg: RunConfig | None = None, outdir=None,
               map_fn: Callable = map) -> list[Path]:
    """Write the data behind one figure plus ``manifest.json``.

    Parameters
    ----------
    fig_id : str
        One of :data:`FIGURES`.
    cfg : RunConfig, optional
        Defaults to the figure's caption parameters.
    outdir : path-like, optional
        Defaults to ``cfg.outputs.directory``.

    Returns
    -------
    list of Path
        Data files followed by the manifest.
    """
    if fig_id not in _RECIPES:
        raise UnknownFigure(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")
    cfg = cfg or figure_config(fig_id)
    out = Path(outdir if outdir is not None else cfg.outputs.directory)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest(f"figure {fig_id}", cfg.to_dict())
    files = _RECIPES[fig_id](cfg, out, man, map_fn)
    man.add_files(files)
    return files + [man.write(out)]
