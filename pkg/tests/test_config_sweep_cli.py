import dataclasses
import json
import math
from pathlib import Path

import numpy as np
import pytest

from secrecy_rfuowc import BACKEND, DegenerateEta, ParseError, ValidationError, analytic, sop_lower
from secrecy_rfuowc.cli import main
from secrecy_rfuowc.config import PresetTable, SweepSpec, load_config, parse_config
from secrecy_rfuowc.errors import MissingEngine
from secrecy_rfuowc.params import Detection, SystemConfig
from secrecy_rfuowc.sweep import (
    COLUMNS, Row, apply_variable, compare_report, run_sweep, to_bits, write_csv, write_jsonl,
)

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
# the two kernel backends agree to ~1e-15, so each keeps its own byte-exact golden
GOLDEN = Path(__file__).parent / "golden" / f"small_sweep.{BACKEND}.csv"

SMALL = {
    "sr": {"eta": 2.2, "mu": 2, "n_antennas": 2, "avg_snr_db": 5.0},
    "se": {"eta": 2.2, "mu": 2, "n_antennas": 1, "avg_snr_db": 0.0},
    "rd": {"preset": "test-vector-B", "detection": "IMDD", "avg_snr_db": 15.0},
    "n_s": 2,
    "sweep": {"variable": "phi_e_db", "grid": [-5, 0, 5], "metrics": ["ASC", "SOP_L", "SPSC"],
              "engines": ["analytic", "mc"], "mc_samples": 20000},
}


def _spec(**over):
    return parse_config(json.dumps({**SMALL, **over}))


# -- configuration --------------------------------------------------------------------


def test_minimal_config_defaults():
    spec = load_config(CONFIGS / "minimal.json")
    assert isinstance(spec.base, SystemConfig)
    assert spec.variable is None
    assert spec.base.rd.avg_snr_d == pytest.approx(31.6227766, rel=1e-9)
    assert spec.base.rd.detection is Detection.HD
    assert spec.base.target_rate == 0.01


def test_degenerate_eta_in_config():
    with pytest.raises(ValidationError) as info:
        parse_config('{"sr": {"eta": 1.0}}')
    assert isinstance(info.value, DegenerateEta)


def test_snr_linear_and_db_exclusive():
    with pytest.raises(ParseError) as info:
        parse_config('{\n "rd": {"avg_snr": 3, "avg_snr_db": 4}\n}')
    assert info.value.line == 2 and info.value.field == "avg_snr_db"


def test_parse_error_reports_line_and_field():
    text = '{\n  "sr": {\n    "eta": "big"\n  }\n}'
    with pytest.raises(ParseError) as info:
        parse_config(text)
    assert info.value.line == 3 and info.value.field == "eta"
    assert "line 3" in str(info.value)


def test_invalid_json_reports_line():
    with pytest.raises(ParseError) as info:
        parse_config('{\n  "sr": {,\n}')
    assert info.value.line == 2


@pytest.mark.parametrize("text", [
    '{"bogus": 1}', '{"sr": {"colour": 1}}', '{"sweep": {"grid": [1, 2]}}',
    '{"sweep": {"variable": "phi_r_db", "grid": [1, 1]}}',
    '{"sweep": {"variable": "phi_r_db", "grid": [1, 3, 2]}}',
    '{"sweep": {"variable": "nope", "grid": [1]}}',
    '{"sweep": {"metrics": ["SOP_exact"]}}',
    '{"sweep": {"engines": ["mc"], "mc_samples": 10}}',
    '{"rd": {"omega": 0.3}}', '{"rd": {"preset": "no-such"}}', '[1, 2]',
])
def test_invalid_configs(text):
    with pytest.raises((ParseError, ValidationError)):
        parse_config(text)


def test_decreasing_grid_allowed():
    assert _spec(sweep={**SMALL["sweep"], "grid": [5, 0, -5]}).grid == (5.0, 0.0, -5.0)


def test_presets_file(tmp_path):
    (tmp_path / "p.json").write_text((CONFIGS / "presets.example.json").read_text())
    (tmp_path / "c.json").write_text(json.dumps({"presets": "p.json",
                                                 "rd": {"preset": "my-measured-vector"}}))
    spec = load_config(tmp_path / "c.json")
    assert spec.base.rd.omega == 0.4 and spec.base.rd.label == "my-measured-vector"


def test_preset_table_ships_empty_and_validates():
    assert len(PresetTable()) == 0
    with pytest.raises(ValidationError):
        PresetTable({"x": {"omega": 0.3, "lambda": 1, "a": 1, "b": 1}})
    with pytest.raises(ValidationError):
        PresetTable({"x": {"omega": 2.0, "lambda": 1, "a": 1, "b": 1, "c": 1}})


def test_explicit_megg_vector():
    spec = parse_config('{"rd": {"omega": 0.3, "lambda": 0.5, "a": 2, "b": 1.1, "c": 0.7, '
                        '"detection": "IMDD", "avg_snr": 20}}')
    assert spec.base.rd.c == 0.7 and spec.base.rd.r == 2 and spec.base.rd.avg_snr_d == 20.0


def test_apply_variable_covers_all():
    base = _spec().base
    assert apply_variable(base, "phi_r_db", 10).sr.avg_snr == pytest.approx(10.0)
    assert apply_variable(base, "n_e", 3).se.n_antennas == 3
    assert apply_variable(base, "mu_r", 3).sr.mu == 3
    assert apply_variable(base, "target_rate", 0.5).target_rate == 0.5
    # psi_r_db sets the electrical SNR directly
    assert apply_variable(base, "psi_r_db", 10).rd.psi == pytest.approx(10.0)
    with pytest.raises(ValueError):
        apply_variable(base, "nope", 1)


# -- sweeps ----------------------------------------------------------------------


def test_row_count_and_order():
    spec = _spec()
    rows = run_sweep(spec, seed=1, workers=1)
    assert len(rows) == len(spec.grid) * len(spec.metrics) * len(spec.engines)
    assert [r.value for r in rows[::6]] == [-5.0, 0.0, 5.0]
    assert all(r.status == "ok" for r in rows)


def test_csv_golden_and_byte_stable():
    spec = _spec()
    a = write_csv(run_sweep(spec, seed=7, workers=1))
    b = write_csv(run_sweep(spec, seed=7, workers=3))
    assert a == b
    assert a.splitlines()[0] == ",".join(COLUMNS)
    assert a == GOLDEN.read_text()


def test_seed_changes_mc_rows_only():
    spec = _spec()
    a = run_sweep(spec, seed=1, workers=1)
    b = run_sweep(spec, seed=2, workers=1)
    for ra, rb in zip(a, b):
        assert (ra.result == rb.result) == (ra.engine == "analytic")


def test_single_point_equals_direct_call():
    spec = dataclasses.replace(_spec(), variable="phi_r_db", grid=(7.0,), engines=("analytic",),
                               metrics=("SOP_L",))
    row = run_sweep(spec, workers=1)[0]
    cfg = apply_variable(spec.base, "phi_r_db", 7.0)
    assert row.result == sop_lower(cfg).value


def test_timing_column():
    spec = dataclasses.replace(_spec(), engines=("analytic",), metrics=("SPSC",))
    assert all(math.isnan(r.ms) for r in run_sweep(spec, workers=1))
    assert all(r.ms >= 0 for r in run_sweep(spec, workers=1, timing=True))


def test_bits_conversion():
    rows = [Row("v", 1.0, "ASC", "analytic", math.log(2), 0.0, "ok", math.nan),
            Row("v", 1.0, "SPSC", "analytic", 0.3, 0.0, "ok", math.nan)]
    out = to_bits(rows)
    assert out[0].result == pytest.approx(1.0) and out[1].result == 0.3


def test_jsonl_matches_csv():
    rows = run_sweep(dataclasses.replace(_spec(), engines=("analytic",)), workers=1)
    lines = write_jsonl(rows).splitlines()
    assert len(lines) == len(rows)
    first = json.loads(lines[0])
    assert list(first) == list(COLUMNS) and first["ms"] is None


def test_failed_point_recorded_in_row():
    spec = dataclasses.replace(_spec(), variable="eta_r", grid=(0.5, 1.0, 2.0),
                               engines=("analytic",), metrics=("SPSC",))
    rows = run_sweep(spec, workers=1)
    assert [r.status for r in rows] == ["ok", "error:DegenerateEta", "ok"]
    assert write_csv(rows).splitlines()[2].endswith(",,,error:DegenerateEta,")


def test_fig3_shaped_sweep():
    spec = load_config(CONFIGS / "fig3_sop_vs_phi_r.json")
    spec = dataclasses.replace(spec, engines=("analytic",))
    curves = {}
    for n_r in (1, 2):
        base = apply_variable(spec.base, "n_r", n_r)
        rows = run_sweep(dataclasses.replace(spec, base=base), workers=1)
        curves[n_r] = np.array([r.result for r in rows])
    for c in curves.values():
        # strictly decreasing until the curve saturates at the floor set by the optical hop
        assert np.all(np.diff(c[:4]) < 0) and np.all(np.diff(c) <= 0)
        assert abs(c[-1] - c[-4]) < 1e-6 * c[-1]
    assert np.all(curves[2] <= curves[1])


def test_fig5_shaped_sweep():
    spec = load_config(CONFIGS / "fig5_sop_vs_phi_e_imdd.json")
    out = {}
    for det in ("HD", "IMDD"):
        base = spec.base.replace(rd=dataclasses.replace(spec.base.rd, detection=det))
        rows = run_sweep(dataclasses.replace(spec, base=base, engines=("analytic", "mc"),
                                             mc_samples=100_000), seed=3, workers=1)
        out[det] = rows
        assert compare_report(rows).n_flagged == 0
    ana = {d: np.array([r.result for r in rows if r.engine == "analytic" and r.metric == "SOP_L"])
           for d, rows in out.items()}
    assert np.all(ana["HD"] < ana["IMDD"])


# -- comparison report -------------------------------------------------------------


def test_compare_report_flags_corruption():
    rows = run_sweep(_spec(), seed=4, workers=1)
    clean = compare_report(rows)
    assert clean.n_flagged == 0 and clean.n_pass == 9
    i = next(k for k, r in enumerate(rows) if r.engine == "analytic" and r.metric == "SOP_L")
    bad = list(rows)
    bad[i] = dataclasses.replace(rows[i], result=rows[i].result * 1.5 + 0.05)
    rep = compare_report(bad)
    assert rep.n_flagged == 1
    assert "1 flagged" in rep.render()


def test_compare_report_needs_both_engines():
    rows = run_sweep(dataclasses.replace(_spec(), engines=("analytic",)), workers=1)
    with pytest.raises(MissingEngine):
        compare_report(rows)


# -- CLI -------------------------------------------------------------------------


def _write(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(obj))
    return str(p)


def test_cli_ok_and_report(tmp_path, capsys):
    cfg = _write(tmp_path, SMALL)
    out, rep = tmp_path / "o.csv", tmp_path / "r.json"
    code = main(["run", "--config", cfg, "--seed", "7", "--workers", "1", "--out", str(out),
                 "--report", str(rep)])
    assert code == 0
    assert out.read_text() == GOLDEN.read_text()
    assert json.loads(rep.read_text())["n_flagged"] == 0


def test_cli_stdout_jsonl_bits(tmp_path, capsys):
    cfg = _write(tmp_path, SMALL)
    code = main(["run", "--config", cfg, "--engines", "analytic", "--format", "jsonl", "--bits",
                 "--workers", "1"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 9 and json.loads(lines[0])["engine"] == "analytic"


def test_cli_bad_config_exit_one(tmp_path, capsys):
    cfg = _write(tmp_path, {"sr": {"eta": "x"}})
    assert main(["run", "--config", cfg]) == 1
    assert "field 'eta'" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 1


def test_cli_failed_row_exit_one(tmp_path):
    obj = {**SMALL, "sweep": {"variable": "eta_r", "grid": [0.5, 1.0], "metrics": ["SPSC"]}}
    assert main(["run", "--config", _write(tmp_path, obj), "--workers", "1",
                 "--out", str(tmp_path / "o.csv")]) == 1


def test_cli_flag_exit_two(tmp_path, monkeypatch):
    real = analytic.evaluate

    def corrupted(metric, cfg):
        r = real(metric, cfg)
        return dataclasses.replace(r, value=r.value + 0.2) if metric == "SOP_L" else r

    monkeypatch.setattr(analytic, "evaluate", corrupted)
    code = main(["run", "--config", _write(tmp_path, SMALL), "--workers", "1",
                 "--out", str(tmp_path / "o.csv")])
    assert code == 2


def test_cli_bad_engine_list(tmp_path):
    with pytest.raises(SystemExit):
        main(["run", "--config", _write(tmp_path, SMALL), "--engines", "magic"])
