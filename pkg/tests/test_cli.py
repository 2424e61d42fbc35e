"""Command-line interface: exit codes, config precedence, output files."""

import math
import os

import numpy as np
import pytest

from freebound import config as cfg
from freebound.cli import (WINDOW_FRACTIONS, critical_theta, main,
                           window_iters)
from freebound.geometry import load_coeffs, save_coeffs
from freebound.oracle import free_radius


def parse_report(captured: str) -> dict:
    """Turn the aligned 'key  = value' report lines into a dict."""
    out = {}
    for line in captured.splitlines():
        if " = " in line:
            key, value = line.split(" = ", 1)
            out[key.strip()] = value.strip()
    return out


def write_config(path, entries: dict) -> str:
    lines = [f"version = {cfg.CONFIG_VERSION}"]
    lines += [f"{k} = {v}" for k, v in entries.items()]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


# ------------------------------------------------------------ arg parsing

def test_missing_subcommand_exits_two():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2


def test_bad_mode_choice_exits_two():
    with pytest.raises(SystemExit) as excinfo:
        main(["rates", "--mode", "sideways"])
    assert excinfo.value.code == 2


def test_oracle_without_target_is_usage_error(capsys):
    assert main(["oracle"]) == 2
    assert "error:" in capsys.readouterr().err


def test_oracle_rejects_disordered_two_point(tmp_path):
    rc = main(["oracle", "--two-point", "0.8", "0.3",
               "--outdir", str(tmp_path)])
    assert rc == 2


def test_optimize_rejects_negative_iteration_count(tmp_path):
    rc = main(["optimize", "--K", "-3", "--outdir", str(tmp_path)])
    assert rc == 2


# ----------------------------------------------------------------- oracle

def test_oracle_reports_reference_values(capsys, tmp_path):
    rc = main(["oracle", "--r-sigma", "0.5", "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    assert math.isclose(float(report["F(r_sigma)"]),
                        1.172875377461383, rel_tol=1e-12)
    assert math.isclose(float(report["J(F, r_sigma)"]),
                        10.905685172384445, rel_tol=1e-10)
    assert float(report["defining residual"]) <= 1e-10
    assert float(report["lambert residual"]) <= 1e-14


def test_oracle_two_point_scan(capsys, tmp_path):
    rc = main(["oracle", "--two-point", "0.35", "0.55", "--p", "0.4",
               "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    path = tmp_path / "oracle_scan.csv"
    assert path.exists()
    meta, columns, rows = cfg.read_csv(str(path))
    assert meta["command"] == "oracle"
    assert columns == ["r_gamma", "expected_energy"]
    assert len(rows) == 200
    energies = np.array([row[1] for row in rows])
    # The reported constrained minimizer beats every scan point.
    assert float(report["expected energy at minimizer"]) <= energies.min() + 1e-9
    r_star = float(report["constrained minimizer"])
    assert rows[0][0] <= r_star <= rows[-1][0]


# ------------------------------------------------------------------ solve

def test_solve_concentric_matches_oracle(capsys, tmp_path):
    rc = main(["solve", "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    assert math.isclose(float(report["energy J"]),
                        11.420914773846732, rel_tol=1e-9)
    assert float(report["flux balance"]) <= 1e-8
    meta, columns, rows = cfg.read_csv(str(tmp_path / "solve_density.csv"))
    assert meta["command"] == "solve"
    assert columns == ["theta", "neumann_outer", "gradient_density"]
    assert len(rows) == int(report["nodes per boundary"])
    # Defaults are the optimal pair only up to digits of F, so the density
    # is small but the Neumann trace itself is close to -lambda.
    outer = np.array([row[1] for row in rows])
    assert np.allclose(outer, -1.0 / math.log(2.0), atol=1e-10)


def test_solve_accepts_coefficient_files(capsys, tmp_path):
    sigma_path = tmp_path / "sigma.txt"
    outer_path = tmp_path / "outer.txt"
    save_coeffs(str(sigma_path), np.array([0.45, 0.0, 0.02]), "radial")
    save_coeffs(str(outer_path), np.array([1.1, 0.03, 0.0]), "support")
    rc = main(["solve", "--sigma-file", str(sigma_path),
               "--outer-file", str(outer_path), "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    assert float(report["flux balance"]) <= 1e-8
    meta, _, _ = cfg.read_csv(str(tmp_path / "solve_density.csv"))
    assert meta["param"] == "support"


def test_solve_rejects_support_interior(tmp_path):
    sigma_path = tmp_path / "sigma.txt"
    save_coeffs(str(sigma_path), np.array([0.45]), "support")
    rc = main(["solve", "--sigma-file", str(sigma_path),
               "--outdir", str(tmp_path)])
    assert rc == 2


# -------------------------------------------------------------- gradcheck

def test_gradcheck_small_config_passes(capsys, tmp_path):
    rc = main(["gradcheck", "--order", "2", "--num-configs", "1",
               "--nodes", "48", "--modes", "0,3", "--seed", "4",
               "--outdir", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    report = parse_report(out)
    assert report["verdict"] == "ok"
    assert float(report["max relative error"]) <= 1e-3


def test_gradcheck_rejects_out_of_range_mode(tmp_path):
    rc = main(["gradcheck", "--order", "2", "--modes", "11",
               "--outdir", str(tmp_path)])
    assert rc == 2


# ------------------------------------------------------- config and paths

def test_config_file_fills_unset_flags(capsys, tmp_path):
    path = write_config(tmp_path / "run.cfg", {"lam": "2.0", "r_sigma": "0.5"})
    rc = main(["oracle", "--config", path, "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    assert math.isclose(float(report["F(r_sigma)"]),
                        free_radius(0.5, 2.0), rel_tol=1e-12)


def test_flags_override_config_values(capsys, tmp_path):
    path = write_config(tmp_path / "run.cfg", {"lam": "2.0", "r_sigma": "0.5"})
    rc = main(["oracle", "--config", path, "--lambda", "1.0",
               "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    assert math.isclose(float(report["F(r_sigma)"]),
                        1.172875377461383, rel_tol=1e-12)


def test_unknown_config_key_is_usage_error(tmp_path):
    path = write_config(tmp_path / "run.cfg", {"r_sigma": "0.5", "bogus": "3"})
    assert main(["oracle", "--config", path, "--outdir", str(tmp_path)]) == 2


def test_config_without_version_is_usage_error(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("r_sigma = 0.5\n")
    assert main(["oracle", "--config", str(path),
                 "--outdir", str(tmp_path)]) == 2


def test_outdir_env_var_is_used(capsys, tmp_path, monkeypatch):
    outdir = tmp_path / "from_env"
    monkeypatch.setenv("FREEBOUND_OUTDIR", str(outdir))
    rc = main(["solve"])
    assert rc == 0
    capsys.readouterr()
    assert (outdir / "solve_density.csv").exists()


def test_csv_write_read_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    rows = [(1, 1.0 / 3.0), (2, math.pi)]
    cfg.write_csv(str(path), "demo", {"alpha": 0.25, "flag": True},
                  ["n", "value"], rows)
    meta, columns, back = cfg.read_csv(str(path))
    assert meta["command"] == "demo"
    assert meta["alpha"] == "0.25"
    assert meta["flag"] == "true"
    assert columns == ["n", "value"]
    assert back[0][1] == 1.0 / 3.0 and back[1][1] == math.pi


# --------------------------------------------------------------- optimize

def test_optimize_writes_reloadable_artifacts(capsys, tmp_path):
    rc = main(["optimize", "--deterministic", "--K", "8",
               "--snapshots", "0,4", "--prefix", "t1", "--seed", "3",
               "--outdir", str(tmp_path)])
    assert rc == 0
    capsys.readouterr()
    meta, columns, rows = cfg.read_csv(str(tmp_path / "t1_trajectory.csv"))
    assert meta["command"] == "optimize"
    assert meta["seed"] == "3"
    assert columns == ["n", "t_n", "J_sample", "grad_norm_proxy"]
    assert [int(row[0]) for row in rows] == list(range(1, 9))

    start, kind = load_coeffs(str(tmp_path / "t1_snapshot_00000.txt"))
    assert kind == "radial"
    assert start[0] == 0.75 and np.all(start[1:] == 0.0)
    final, kind = load_coeffs(str(tmp_path / "t1_final.txt"))
    assert kind == "radial"
    # The circle radius grows toward the free boundary at 1.1728.
    assert final[0] > 0.75
    assert np.all(np.abs(final[1:]) < 1e-12)


def test_optimize_runs_reproduce_bitwise(capsys, tmp_path):
    args = ["optimize", "--K", "6", "--seed", "9", "--order", "3",
            "--nodes", "48", "--amplitude", "0.05", "--prefix", "t2"]
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--outdir", str(dir_a)]) == 0
    assert main(args + ["--outdir", str(dir_b)]) == 0
    capsys.readouterr()
    for name in ("t2_trajectory.csv", "t2_final.txt"):
        assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()


def test_optimize_flat_amplitudes_aborts_cleanly(capsys, tmp_path):
    # Half-width 0.5 on every mode almost never fits the containment bounds,
    # so the resampler gives up and the run reports failure instead of
    # looping forever.
    rc = main(["optimize", "--K", "2", "--flat-amplitudes",
               "--prefix", "t3", "--outdir", str(tmp_path)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "run aborted" in err and "attempts" in err
    assert not (tmp_path / "t3_trajectory.csv").exists()


# ------------------------------------------------------------------ rates

def test_window_iters_covers_every_fraction():
    iters = window_iters((100, 200))
    expected = sorted({max(1, round(k * f))
                       for k in (100, 200) for f in WINDOW_FRACTIONS})
    assert list(iters) == expected


def test_rates_needs_at_least_two_grid_points(capsys, tmp_path):
    rc = main(["rates", "--k-grid", "100", "--outdir", str(tmp_path)])
    assert rc == 1
    assert "at least two" in capsys.readouterr().err


def test_rates_deterministic_full_grid_slopes(capsys, tmp_path):
    # Single-solve-per-step campaign at the critical step size: cost gap
    # decays like 1/K and the gradient norm like 1/sqrt(K).
    rc = main(["rates", "--mode", "deterministic", "--prefix", "rd",
               "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    assert int(report["usable K points"]) == 7
    assert float(report["cost slope"]) == pytest.approx(-1.0, abs=0.15)
    assert float(report["gradient slope"]) == pytest.approx(-0.5, abs=0.15)


def test_rates_deterministic_small_grid(capsys, tmp_path):
    rc = main(["rates", "--mode", "deterministic",
               "--k-grid", "50,100,200,400", "--nodes", "64",
               "--prefix", "rr", "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    assert math.isclose(float(report["theta_step"]),
                        critical_theta(0.5, 1.0), rel_tol=1e-4)
    assert int(report["usable K points"]) == 4
    assert -1.3 < float(report["cost slope"]) < -0.55

    meta, columns, rows = cfg.read_csv(str(tmp_path / "rr_cost.csv"))
    assert meta["command"] == "rates"
    assert columns == ["K", "mean_gap", "gap_run0"]
    gaps = [row[1] for row in rows]
    assert all(g > 0 for g in gaps)
    assert gaps == sorted(gaps, reverse=True)
    _, columns, rows = cfg.read_csv(str(tmp_path / "rr_grad.csv"))
    assert columns == ["K", "mean_grad_norm", "norm_run0"]
    assert all(row[1] > 0 for row in rows)


# ------------------------------------------------------------- coercivity

def test_coercivity_small_run(capsys, tmp_path):
    rc = main(["coercivity", "--samples", "10", "--order", "3",
               "--nodes", "48", "--seed", "1", "--outdir", str(tmp_path)])
    assert rc == 0
    report = parse_report(capsys.readouterr().out)
    c_e = float(report["empirical c_E"])
    assert c_e > 0
    _, _, rows = cfg.read_csv(str(tmp_path / "coercivity_ratios.csv"))
    assert len(rows) == 10
    ratios = [row[1] for row in rows]
    assert math.isclose(min(ratios), c_e, rel_tol=1e-5)
    assert all(r > 0 for r in ratios)
