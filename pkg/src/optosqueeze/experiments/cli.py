"""Squeezing simulations, parameter sweeps and figure data from the command line.

Exit codes: 0 success, 2 configuration error, 3 computation error.
"""
from __future__ import annotations

import argparse
import contextlib
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..dynamics import (CovarianceState, EffectiveParams, analytic_eff_cm, classify_stability, evolve,
                        steady_state)
from ..errors import ConfigError, OptoSqueezeError
from ..matrices import build_diffusion, build_full_drift, build_reservoir_drift, write_matrix_csv
from ..spectral import default_grid, eigen_scan, extract_geff_numeric
from .config import DEFAULT_CONFIG, RunConfig, load_config
from .figures import FIGURE_DEFAULTS, FIGURES, run_figure
from .io import RunManifest, write_json, write_table
from .sweeps import (baseline_reservoir, cell_tau, initial_full_state, run_levels,
                     sweep_systematic, sweep_thermal)

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key by dotted path, e.g. system.g=0.15")
    p.add_argument("--out", type=Path, help="output directory (default: outputs.directory)")
    p.add_argument("--workers", type=int, default=1, help="process pool size for sweep cells")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="optosqueeze", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("geff-scan", parents=[common], help="eigenvalue scan and numeric g_eff")
    s.add_argument("--points", type=int, default=801)

    s = sub.add_parser("evolve", parents=[common], help="covariance trajectory")
    s.add_argument("--model", choices=("full", "effective", "analytic"), default="full")

    s = sub.add_parser("steady", parents=[common], help="Lyapunov steady state")
    s.add_argument("--model", choices=("full", "effective", "reservoir"), default="full")

    sub.add_parser("squeeze", parents=[common], help="squeezing levels along the time grid")

    s = sub.add_parser("figure", parents=[common], help="reproduce a figure's data")
    s.add_argument("fig_id", choices=FIGURES)

    s = sub.add_parser("sweep-error", parents=[common], help="systematic-error sweep at tau")
    s.add_argument("--gammas", type=_floats, default=[0.0])
    s.add_argument("--etas", type=_floats, default=[0.0])

    s = sub.add_parser("sweep-thermal", parents=[common], help="temperature sweep")
    s.add_argument("--temps", type=_floats, default=[0.0, 0.02, 0.05, 0.1, 0.2])

    s = sub.add_parser("baseline", parents=[common], help="reservoir-engineering steady state")
    s.add_argument("--ratios", type=_floats,
                   default=[round(x, 6) for x in np.linspace(0.1, 0.99, 90)])
    return ap


def _config(args) -> RunConfig:
    base = FIGURE_DEFAULTS[args.fig_id] if args.verb == "figure" else DEFAULT_CONFIG
    return load_config(args.config, args.overrides, base=base)


def _outdir(args, cfg: RunConfig) -> Path:
    out = Path(args.out if args.out is not None else cfg.outputs.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _table(out, stem, header, rows, cfg, man: RunManifest, statuses=()):
    for s in statuses:
        man.record(s)
    man.add_files(write_table(out, stem, header, rows, cfg.outputs.csv, cfg.outputs.json))


def _cmd_geff_scan(args, cfg, out, man, map_fn):
    p, _, _ = cfg.cell()
    branches = eigen_scan(p, default_grid(p, args.points))
    rows = [[x, b.branch_id, int(b.is_mechanical), b.eigenvalues[k].real, b.eigenvalues[k].imag]
            for k, x in enumerate(branches[0].scan_values) for b in branches]
    _table(out, "scan", ["delta_a", "branch_id", "mechanical", "re_lambda", "im_lambda"], rows, cfg, man)
    ex = extract_geff_numeric(p, branches[0].scan_values)
    man.add_files([write_json(out / "geff.json", ex.to_dict())])
    man.record("ok")
    print(f"g_eff_num = {ex.g_eff_num:.6g}  g_eff_ana = {ex.g_eff_ana:.6g}  sigma = {ex.sigma:.3g}  "
          f"delta_num = {ex.delta_num:.6g}")


def _cmd_evolve(args, cfg, out, man, map_fn):
    p, _, _ = cfg.cell()
    times = cfg.times.resolve(cell_tau(p))
    if args.model == "full":
        a, d = build_full_drift(p), build_diffusion(p)
        v0 = initial_full_state(p, cfg.initial_state)
        states = [evolve(a, d, v0, t) for t in times]
    else:
        ep = EffectiveParams.from_system(p)
        if args.model == "effective":
            states = [evolve(ep.drift, ep.diffusion, ep.initial_state(), t) for t in times]
        else:
            states = [analytic_eff_cm(ep, t) for t in times]
    n = states[0].v.shape[0]
    iu = np.triu_indices(n)
    header = ["t"] + [f"V{i + 1}{j + 1}" for i, j in zip(*iu)]
    rows = [[s.t] + list(s.v[iu]) for s in states]
    _table(out, f"trajectory_{args.model}", header, rows, cfg, man, ["ok"] * len(rows))


def _cmd_steady(args, cfg, out, man, map_fn):
    p, _, _ = cfg.cell()
    if args.model == "full":
        a, d = build_full_drift(p), build_diffusion(p)
    elif args.model == "reservoir":
        a, d = build_reservoir_drift(p), build_diffusion(p)
    else:
        ep = EffectiveParams.from_system(p)
        a, d = ep.drift, ep.diffusion
    rep = classify_stability(a)
    report = {"model": args.model, "status": rep.status, "max_re_eig": rep.max_re_eig,
              "effective_criterion": rep.effective_criterion}
    man.add_files([write_json(out / "stability.json", report)])
    v: CovarianceState = steady_state(a, d)
    man.add_files([write_matrix_csv(v.v, out / f"steady_{args.model}.csv")])
    man.record("ok")


def _cmd_squeeze(args, cfg, out, man, map_fn):
    header, rows, st = run_levels(cfg, map_fn)
    _table(out, "squeeze", header, rows, cfg, man, st)


def _cmd_sweep_error(args, cfg, out, man, map_fn):
    header, rows, st = sweep_systematic(cfg, args.gammas, args.etas, map_fn)
    _table(out, "sweep_error", header, rows, cfg, man, st)


def _cmd_sweep_thermal(args, cfg, out, man, map_fn):
    header, rows, st = sweep_thermal(cfg, args.temps, map_fn)
    _table(out, "sweep_thermal", header, rows, cfg, man, st)


def _cmd_baseline(args, cfg, out, man, map_fn):
    header, rows, st = baseline_reservoir(cfg, args.ratios, map_fn)
    _table(out, "baseline", header, rows, cfg, man, st)


_COMMANDS = {
    "geff-scan": _cmd_geff_scan, "evolve": _cmd_evolve, "steady": _cmd_steady,
    "squeeze": _cmd_squeeze, "sweep-error": _cmd_sweep_error,
    "sweep-thermal": _cmd_sweep_thermal, "baseline": _cmd_baseline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _outdir(args, cfg)
    with contextlib.ExitStack() as stack:
        map_fn = map
        if args.workers > 1:
            map_fn = stack.enter_context(ProcessPoolExecutor(args.workers)).map
        try:
            if args.verb == "figure":
                files = run_figure(args.fig_id, cfg, out, map_fn)
                print("\n".join(str(f) for f in files))
                return EXIT_OK
            man = RunManifest(args.verb, cfg.to_dict())
            _COMMANDS[args.verb](args, cfg, out, man, map_fn)
            print(man.write(out))
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (OptoSqueezeError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
