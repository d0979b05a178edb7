import hashlib
import json
import math

import pytest

from optosqueeze.errors import ConfigError, UnknownFigure
from optosqueeze.experiments import (FIGURES, RunConfig, figure_config, load_config, run_figure,
                                     sweep_systematic, sweep_thermal)
from optosqueeze.experiments.cli import main
from optosqueeze.experiments.config import DEFAULT_CONFIG, TimeSpec, apply_overrides
from optosqueeze.experiments.io import RunManifest, fmt, read_csv, write_csv
from optosqueeze.experiments.sweeps import LevelCell, baseline_reservoir, level_cell
from optosqueeze.model import SystemParams


def _small(**extra):
    d = json.loads(json.dumps(DEFAULT_CONFIG))
    d["times"] = {"tau_fractions": [0.0, 0.5, 1.0]}
    d.update(extra)
    return d


# -- config -----------------------------------------------------------------

def test_default_config_is_fig2():
    cfg = load_config()
    assert cfg.system == SystemParams.fig2()
    assert cfg.auto == {"G", "delta_a", "delta_b"}


def test_unknown_keys_rejected():
    for bad in ({"system": {"g": 0.1, "kapa": 1}}, {"systen": {}}, {"system": {"g": 0.1},
                "times": {"step": 1}}, {"system": {"g": 0.1}, "physical": {"T": 1}}):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(bad)


def test_invariants():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"system": {"g": 0.1}, "sweep": [{"name": "nope", "values": [1]}]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"system": {"g": 0.1}, "sweep": [{"name": "g", "start": 0.1, "count": 0}]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"system": {"g": 0.1}, "times": {"values": [-1.0]}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"system": {"g": -0.1}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"system": {"g": 0.1}, "initial_state": "hot"})


def test_dotted_overrides():
    d = apply_overrides(DEFAULT_CONFIG, ["system.g=0.15", "outputs.directory=x", "errors.gamma=0.1"])
    assert d["system"]["g"] == 0.15 and d["outputs"]["directory"] == "x"
    cfg = RunConfig.from_dict(d)
    assert cfg.system.delta_b == pytest.approx(2.5) and cfg.system.G == 0.15
    assert cfg.errors.gamma == 0.1
    with pytest.raises(ConfigError):
        apply_overrides(DEFAULT_CONFIG, ["system.g"])
    with pytest.raises(ConfigError):
        apply_overrides(DEFAULT_CONFIG, ["system.g.x=1"])


def test_sweep_rederives_auto_fields():
    cfg = RunConfig.from_dict({**DEFAULT_CONFIG, "sweep": [{"name": "g", "start": 0.1, "stop": 0.2,
                                                            "count": 3}]})
    p, _, _ = cfg.cell({"g": 0.2})
    assert p.G == 0.2 and p.delta_b == pytest.approx(3.0)
    assert p.delta_a == pytest.approx(-3.0 - 0.02)
    q, _, _ = cfg.cell({"delta_b": 2.5})
    assert q.g == 0.1 and q.delta_b == 2.5


def test_physical_block_sets_occupations():
    cfg = RunConfig.from_dict({**DEFAULT_CONFIG, "physical": {"temp_k": 0.02}})
    p, phys, _ = cfg.cell()
    assert p.n_m == pytest.approx(41.175, rel=1e-4)


def test_config_round_trip():
    for fig in FIGURES:
        cfg = figure_config(fig)
        assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(UnknownFigure):
        figure_config("fig9")


def test_time_spec():
    assert TimeSpec().resolve(2.0).size == 512
    assert TimeSpec().resolve(2.0)[-1] == pytest.approx(3.0)
    assert TimeSpec(tau_fractions=(0.5,)).resolve(4.0).tolist() == [2.0]


# -- io ---------------------------------------------------------------------

def test_fmt():
    assert fmt(float("nan")) == "nan" and fmt(None) == "nan"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3" and fmt("ok") == "ok"
    assert float(fmt(math.pi)) == math.pi


def test_csv_round_trip(tmp_path):
    p = write_csv(tmp_path / "a.csv", ["x", "y"], [[1 / 3, float("nan")]])
    header, rows = read_csv(p)
    assert header == ["x", "y"] and rows[0][0] == 1 / 3 and math.isnan(rows[0][1])


def test_manifest_digests(tmp_path):
    f = write_csv(tmp_path / "a.csv", ["x"], [[1.0]])
    m = RunManifest("test", {"k": 1})
    m.record("ok", 2)
    m.record("missing")
    m.add_files([f])
    doc = json.loads(m.write(tmp_path).read_text())
    assert doc["cells"] == {"ok": 2, "missing": 1, "unstable": 0}
    assert doc["files"] == [{"path": "a.csv",
                             "sha256": hashlib.sha256(f.read_bytes()).hexdigest()}]
    assert doc["config"] == {"k": 1} and doc["wall_clock_s"] >= 0
    with pytest.raises(ValueError):
        m.record("weird")


# -- cells and sweeps --------------------------------------------------------

def test_level_cell_vacuum_start():
    status, rows = level_cell(LevelCell(SystemParams.fig2(), (0.0,)))
    t, dxe, se, dx, s, dxt, st, dy, sa = rows[0][:9]
    assert status == "ok"
    assert (dxe, dx, dxt, dy) == pytest.approx((0.5, 0.5, 0.5, 0.5), abs=1e-12)


def test_level_cell_failure_is_missing():
    bad = SystemParams(delta_a=-1.0, delta_b=1.0 + 1e-14, g=0.1, G=0.1)
    status, rows = level_cell(LevelCell(bad, (0.0, 1.0)))
    assert status == "missing" and all(math.isnan(v) for v in rows[0][1:])


def test_level_cell_overflow_is_unstable():
    status, rows = level_cell(LevelCell(SystemParams.fig2(), (1e5,)))
    assert status == "unstable" and math.isnan(rows[0][3])


def test_sweep_systematic_shape():
    cfg = load_config()
    header, rows, st = sweep_systematic(cfg, [0.0, 0.2], [0.0])
    assert header[:3] == ["gamma", "eta", "tau"] and len(rows) == 2
    assert rows[0][header.index("S_tilde_lin")] == pytest.approx(8.611, abs=2e-3)


def test_sweep_thermal_zero_temperature_is_fig2():
    header, rows, st = sweep_thermal(load_config(), [0.0])
    assert rows[0][header.index("n_m")] == 0.0
    assert rows[0][header.index("S_lin_tau")] == pytest.approx(8.24, abs=0.01)


def test_baseline_invalid_ratio_missing():
    cfg = figure_config("figB")
    header, rows, st = baseline_reservoir(cfg, [0.5, 1.0])
    assert st == ["ok", "missing"]
    assert math.isnan(rows[1][header.index("S")])


def test_baseline_small_ratio_is_vacuum():
    header, rows, _ = baseline_reservoir(figure_config("figB", ["system.n_m=0"]), [1e-6])
    assert rows[0][header.index("S")] == pytest.approx(0.0, abs=1e-4)
    # a hot phonon bath leaks a little noise into mode a through the beam splitter
    header, rows, _ = baseline_reservoir(figure_config("figB"), [1e-6])
    assert -0.1 < rows[0][header.index("S")] < 0


# -- figures and CLI ---------------------------------------------------------

def test_fig2b_columns_and_plateau(tmp_path):
    files = run_figure("fig2b", outdir=tmp_path)
    header, rows = read_csv(tmp_path / "fig2b.csv")
    assert header[:4] == ["t", "dX_eff_analytic", "dX_full", "dXtilde_full"]
    assert len(rows) == 512
    late = [r[1] for r in rows if r[0] > 409.8]
    assert min(late) == pytest.approx(0.0652, abs=1e-4) and max(late) < 0.0661
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert {f["path"] for f in man["files"]} == {p.name for p in files[:-1]}


def test_figure_determinism_and_round_trip(tmp_path):
    run_figure("fig2a", outdir=tmp_path / "a")
    cfg = RunConfig.from_dict(json.loads(json.dumps(figure_config("fig2a").to_dict())))
    run_figure("fig2a", cfg, outdir=tmp_path / "b")
    for name in ("fig2a.csv", "fig2a.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fig3_decline_for_strong_coupling(tmp_path):
    run_figure("fig3", outdir=tmp_path)
    header, rows = read_csv(tmp_path / "fig3_trajectories.csv")
    gi, ti, si = header.index("g"), header.index("t"), header.index("S_lin")
    g25 = [(r[ti], r[si]) for r in rows if r[gi] == 0.25]
    t_peak = max(g25, key=lambda x: x[1])[0]
    assert 200 < t_peak < 330
    assert g25[-1][1] < max(s for _, s in g25) - 2.0
    _, anti = read_csv(tmp_path / "fig3_anti.csv")
    assert len(anti) == 27


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["squeeze", "--out", str(tmp_path / "ok"), "--set", "times.count=4"]) == 0
    assert (tmp_path / "ok" / "manifest.json").exists()
    assert main(["squeeze", "--out", str(tmp_path / "bad"), "--set", "system.kapa=1"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["squeeze", "--config", str(cfg)]) == 2
    # the full model at the reference point is not Hurwitz: hard failure
    assert main(["steady", "--out", str(tmp_path / "st")]) == 3
    assert main(["steady", "--model", "reservoir", "--out", str(tmp_path / "st2"),
                 "--set", "system.G=0.05"]) == 0
    with pytest.raises(SystemExit) as exc:
        main(["figure", "fig9"])
    assert exc.value.code == 2


def test_cli_verbs(tmp_path):
    out = tmp_path
    assert main(["evolve", "--model", "analytic", "--out", str(out / "e"),
                 "--set", "times.count=3"]) == 0
    header, rows = read_csv(out / "e" / "trajectory_analytic.csv")
    assert header[:3] == ["t", "V11", "V12"] and len(rows) == 3
    assert main(["sweep-error", "--gammas", "0,0.1", "--out", str(out / "s")]) == 0
    assert main(["sweep-thermal", "--temps", "0,0.02", "--out", str(out / "t")]) == 0
    assert main(["baseline", "--ratios", "0.5,0.9", "--set", "system.g=0.02",
                 "--out", str(out / "b")]) == 0
    assert main(["geff-scan", "--points", "201", "--set", "system.delta_b=3.0",
                 "--set", "system.delta_a=-3.0", "--out", str(out / "g")]) == 0
    geff = json.loads((out / "g" / "geff.json").read_text())
    assert geff["g_eff_num"] == pytest.approx(0.0024953, rel=1e-3)


def test_parallel_map_matches_serial(tmp_path):
    args = ["sweep-error", "--gammas", "0,0.1,0.2", "--set", "times.count=2"]
    assert main(args + ["--out", str(tmp_path / "s")]) == 0
    assert main(args + ["--out", str(tmp_path / "p"), "--workers", "2"]) == 0
    assert ((tmp_path / "s" / "sweep_error.csv").read_bytes()
            == (tmp_path / "p" / "sweep_error.csv").read_bytes())
