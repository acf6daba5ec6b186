import json
import subprocess
import sys

import numpy as np
import pytest

from spinbath.cli import main
from spinbath.config import validate_config
from spinbath.sweep import CSV_HEADER, run_sweep

SMALL_SEMICLASSICAL = """
[model]
kind = semiclassical

[grid]
t_M = 1e-6 1e-6 1 linear
t_I = 1e-6 9e-6 3 linear

[species.69Ga]
gamma_MHz_per_T = 10.2478
total_hyperfine_ueV = 74.0
abundance = 0.5
spin = 1.5

[species.75As]
gamma_MHz_per_T = 7.3150
total_hyperfine_ueV = 86.0
abundance = 0.5
spin = 1.5

[geometry]
z0_nm = 7.5
L_nm = 25.0
nu0_nm3 = 0.02258
N_total = 100000

[physics]
B_ext_T = 0.04
delta_B_rms_T = 0.0002
n_clusters = 3
outer = SE
intermediate = FID

[execution]
threads = 1
seed = 77
mc_samples = 16
"""

TRIVIAL_UNIAXIAL = """
[model]
kind = uniaxial

[grid]
t_M = 0 0 1 linear
t_I = 5e-6 5e-6 1 linear

[species.toy]
gamma_MHz_per_T = 0.0
total_hyperfine_rad_per_s = 1e9
abundance = 1.0

[geometry]
z0_nm = 8
L_nm = 13
nu0_nm3 = 1.0
N_total = 1000
"""


def test_single_point_zero_window(tmp_path):
    cfg = validate_config(TRIVIAL_UNIAXIAL)
    out = run_sweep(cfg, tmp_path, name="trivial")
    assert len(out.rows) == 1
    body = out.csv_path.read_text()
    lines = body.strip().split("\n")
    assert lines[0] == CSV_HEADER
    t_m, t_i, c, stderr, n = lines[1].split(",")
    assert float(c) == 1.0
    assert float(stderr) == 0.0
    assert n == "1"


def test_csv_roundtrips_float64(tmp_path):
    cfg = validate_config(SMALL_SEMICLASSICAL)
    out = run_sweep(cfg, tmp_path, name="rt")
    for row, line in zip(out.rows, out.csv_path.read_text().strip().split("\n")[1:]):
        fields = line.split(",")
        assert float(fields[0]) == row.t_M
        assert float(fields[2]) == row.C
        assert float(fields[3]) == row.stderr


def test_thread_count_does_not_change_bytes(tmp_path):
    cfg = validate_config(SMALL_SEMICLASSICAL)
    a = run_sweep(cfg.with_overrides(threads=1), tmp_path / "a", name="x")
    b = run_sweep(cfg.with_overrides(threads=4), tmp_path / "b", name="x")
    assert a.csv_path.read_bytes() == b.csv_path.read_bytes()


def test_manifest_contents_and_rerun(tmp_path):
    cfg = validate_config(SMALL_SEMICLASSICAL)
    out = run_sweep(cfg, tmp_path, name="run1")
    manifest = json.loads(out.manifest_path.read_text())
    for key in ("spinbath_version", "kernel_backend", "config", "seed",
                "wall_time_s", "degenerate_samples", "csv_sha256", "created_utc"):
        assert key in manifest
    assert manifest["config"]["physics"]["B_ext_T"] == "0.04"
    # rerun from the manifest alone
    rc = main(["sweep", "--config", str(out.manifest_path),
               "--out", str(tmp_path / "rerun")])
    assert rc == 0
    rerun = (tmp_path / "rerun" / "run1.csv").read_bytes()
    assert rerun == out.csv_path.read_bytes()


def test_seed_changes_rows(tmp_path):
    cfg = validate_config(SMALL_SEMICLASSICAL)
    a = run_sweep(cfg, tmp_path / "a", name="x")
    b = run_sweep(cfg.with_overrides(seed=78), tmp_path / "b", name="x")
    assert a.csv_path.read_bytes() != b.csv_path.read_bytes()


def test_row_order_is_grid_major(tmp_path):
    cfg = validate_config(SMALL_SEMICLASSICAL.replace(
        "t_M = 1e-6 1e-6 1 linear", "t_M = 1e-6 2e-6 2 linear"))
    out = run_sweep(cfg, tmp_path, name="order")
    tms = [r.t_M for r in out.rows]
    tis = [r.t_I for r in out.rows]
    assert tms == sorted(tms)
    assert tis[:3] == sorted(tis[:3]) and tis[3:] == sorted(tis[3:])


def test_fig2_transition_runs_diagonally(tmp_path):
    # in the small-t_M regime the high/low correlation boundary of the toy
    # model follows t_M * t_I = const
    from spinbath.config import load_run_config
    from spinbath.uniaxial import CONTOUR_LEVEL

    name, cfg = load_run_config("fig2-toy")
    out = run_sweep(cfg, tmp_path, name=name)
    t_m = cfg.t_M.values()
    t_i = cfg.t_I.values()
    C = np.array([r.C for r in out.rows]).reshape(len(t_m), len(t_i))
    a_bar = 1e6  # mean coupling of the preset, rad/s
    products = []
    for i, tm in enumerate(t_m):
        if not 0.06 <= tm * a_bar <= 0.3:
            continue
        below = np.nonzero(C[i] < CONTOUR_LEVEL)[0]
        assert below.size, f"no crossing at t_M*A = {tm * a_bar:.2f}"
        products.append(tm * t_i[below[0]])
    assert len(products) >= 12
    products = np.array(products)
    assert products.max() / products.min() < 1.5


def test_oracle_model_sweep(tmp_path):
    text = """
[model]
kind = oracle

[grid]
t_M = 0 1.0 2 linear
t_I = 0.5 0.5 1 linear

[physics]
couplings_rad_per_s = 0.8 1.1 0.6 1.4
"""
    cfg = validate_config(text)
    out = run_sweep(cfg, tmp_path, name="oracle")
    assert out.rows[0].C == pytest.approx(1.0, abs=1e-12)  # t_M = 0 row
    assert out.rows[0].n_samples == 16


# --- CLI ----------------------------------------------------------------------

def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[model]\nkind = nonsense\n")
    rc = main(["sweep", "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 2


def test_cli_unknown_preset_exit_code(tmp_path):
    rc = main(["sweep", "--config", "definitely-not-a-preset",
               "--out", str(tmp_path)])
    assert rc == 2


def test_cli_unwritable_output(tmp_path):
    cfg_file = tmp_path / "ok.cfg"
    cfg_file.write_text(TRIVIAL_UNIAXIAL)
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    rc = main(["sweep", "--config", str(cfg_file), "--out", str(blocker)])
    assert rc == 3


def test_output_path_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg_file = tmp_path / "withpath.cfg"
    cfg_file.write_text(TRIVIAL_UNIAXIAL + "\n[output]\npath = fromcfg\n")
    rc = main(["sweep", "--config", str(cfg_file)])
    assert rc == 0
    assert (tmp_path / "fromcfg" / "withpath.csv").exists()
    # the flag wins over the config path
    rc = main(["sweep", "--config", str(cfg_file), "--out", "flagged"])
    assert rc == 0
    assert (tmp_path / "flagged" / "withpath.csv").exists()
    # neither given: configuration error
    plain = tmp_path / "plain.cfg"
    plain.write_text(TRIVIAL_UNIAXIAL)
    assert main(["sweep", "--config", str(plain)]) == 2


def test_cli_env_overrides(tmp_path, monkeypatch):
    cfg_file = tmp_path / "ok.cfg"
    cfg_file.write_text(SMALL_SEMICLASSICAL)
    monkeypatch.setenv("SPINBATH_SEED", "1234")
    rc = main(["sweep", "--config", str(cfg_file), "--out", str(tmp_path / "env")])
    assert rc == 0
    manifest = json.loads((tmp_path / "env" / "ok.manifest.json").read_text())
    assert manifest["seed"] == 1234
    # flag beats environment
    rc = main(["sweep", "--config", str(cfg_file), "--seed", "42",
               "--out", str(tmp_path / "flag")])
    manifest = json.loads((tmp_path / "flag" / "ok.manifest.json").read_text())
    assert manifest["seed"] == 42


def test_cli_presets_and_scaling(tmp_path, capsys):
    assert main(["presets"]) == 0
    listed = capsys.readouterr().out
    assert "fig3-sese" in listed
    assert main(["presets", "--show", "fig2-toy"]) == 0
    shown = capsys.readouterr().out
    assert "[model]" in shown
    rc = main(["scaling", "--config", "scaling-toy", "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "fitted exponent" in out
    assert (tmp_path / "scaling-toy.csv").exists()


def test_cli_entry_point_installed():
    res = subprocess.run([sys.executable, "-m", "spinbath.cli", "presets"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "fig2-toy" in res.stdout
