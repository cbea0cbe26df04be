import json
import os

import pytest

from hadamardlab.cli import EXPERIMENTS, main


def run_cli(args):
    return main(args)


def test_catalog_has_nine_entries(capsys):
    assert run_cli([]) == 0
    out = capsys.readouterr().out
    assert len(EXPERIMENTS) == 9
    for name in EXPERIMENTS:
        assert name in out


def test_unknown_flag_is_usage_error(tmp_path):
    before = set(os.listdir(tmp_path))
    rc = run_cli(["identity-check", "--nonsense", "1", "--out", str(tmp_path)])
    assert rc == 2
    assert set(os.listdir(tmp_path)) == before


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("space = ball\nbogus_key = 3\n")
    rc = run_cli(["identity-check", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 2
    assert not (tmp_path / "identity_check.csv").exists()


def test_bad_space_is_usage_error(tmp_path):
    rc = run_cli(["identity-check", "--space", "torus", "--out", str(tmp_path)])
    assert rc == 2
    assert not (tmp_path / "identity_check.csv").exists()


def test_identity_check_writes_outputs(tmp_path):
    rc = run_cli(["identity-check", "--samples", "50", "--seed", "7",
                  "--out", str(tmp_path)])
    assert rc == 0
    csv_text = (tmp_path / "identity_check.csv").read_text()
    assert csv_text.startswith("x0,x1,xi0,xi1,")
    summary = json.loads((tmp_path / "identity_check_summary.json").read_text())
    assert summary["schema_version"] == 1
    assert summary["assertions"][0]["passed"] is True
    assert summary["worst_residual"] < 1e-6


def test_config_file_with_cli_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("samples = 20\nseed = 3\n")
    rc = run_cli(["identity-check", "--config", str(cfg), "--seed", "4",
                  "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "identity_check_summary.json").read_text())
    assert summary["config"]["samples"] == 20
    assert summary["config"]["seed"] == 4  # flag wins over file


def test_outputs_byte_identical_across_threads(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    rc1 = run_cli(["verify-bounds", "--space", "ball", "--n", "2", "--per-shell", "10",
                   "--threads", "1", "--out", str(a_dir)])
    rc2 = run_cli(["verify-bounds", "--space", "ball", "--n", "2", "--per-shell", "10",
                   "--threads", "2", "--out", str(b_dir)])
    assert rc1 == 0 and rc2 == 0
    assert (a_dir / "verify_bounds.csv").read_bytes() == (b_dir / "verify_bounds.csv").read_bytes()
    assert (a_dir / "verify_bounds_summary.json").read_bytes() == (
        b_dir / "verify_bounds_summary.json"
    ).read_bytes()


def test_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("HADAMARD_LAB_OUTDIR", str(tmp_path))
    rc = run_cli(["harnack-yau"])
    assert rc == 0
    assert (tmp_path / "harnack_yau.csv").exists()


def test_verify_bounds_n3_constants(tmp_path):
    rc = run_cli(["verify-bounds", "--space", "ball", "--n", "3", "--per-shell", "15",
                  "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "verify_bounds_summary.json").read_text())
    assert summary["c_at_volume_growth"] <= 1.0 + 1e-6
    assert abs(summary["best_k"] - 2.0) < 0.5


def test_lemma_check_small_ball(tmp_path):
    rc = run_cli(["lemma-check", "--space", "ball", "--samples", "30",
                  "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "lemma_check_summary.json").read_text())
    assert summary["min_slack"] >= -1e-4
    names = [a["name"] for a in summary["assertions"]]
    assert "equality_in_constant_curvature" in names


def test_lemma_check_small_warped(tmp_path):
    rc = run_cli(["lemma-check", "--space", "warped", "--samples", "8",
                  "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "lemma_check_summary.json").read_text())
    assert summary["min_slack"] >= -1e-4
    assert not summary["constant_curvature"]


def test_concentration_small(tmp_path):
    rc = run_cli(["concentration", "--rho-list", "1,2", "--alpha-list", "pi/2",
                  "--walks", "3000", "--eps", "0.05", "--radius", "8",
                  "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "concentration_summary.json").read_text())
    assert "slopes" in summary
    csv_lines = (tmp_path / "concentration.csv").read_text().splitlines()
    assert csv_lines[0].startswith("rho,alpha,mass")
    assert len(csv_lines) == 3


def test_sphere_convergence_small(tmp_path):
    rc = run_cli(["sphere-convergence", "--r-list", "2,4", "--walks", "2000",
                  "--eps", "0.05", "--radius", "8", "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "sphere_convergence_summary.json").read_text())
    assert summary["rate_lambda"] == 0.2


def test_stolz_growth_warped_small(tmp_path):
    rc = run_cli(["stolz-growth", "--space", "warped", "--t-list", "1,2,3",
                  "--walks", "2000", "--eps", "0.049", "--radius", "8",
                  "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "stolz_growth_summary.json").read_text())
    assert "slope" in summary
    assert summary["assertions"][0]["soft"] is True
