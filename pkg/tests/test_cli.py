import json

from ihtlab.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, run_cli


def test_unknown_subcommand_exits_64(capsys):
    assert run_cli(["frobnicate"]) == EXIT_USAGE
    captured = capsys.readouterr()
    assert "usage:" in captured.err


def test_tailbound_prints_all_three_roots(capsys):
    assert run_cli(["tailbound", "--delta", "0.5", "--rho", "0.25", "--lambda", "0.75"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "nu_U=" in out and "nu_L=" in out and "f=" in out and "resid" in out


def test_tailbound_domain_violation_exits_2(capsys):
    assert run_cli(["tailbound", "--delta", "1.5", "--rho", "0.25"]) == EXIT_CONFIG


def test_solve_iht(capsys):
    code = run_cli(["solve", "--n", "60", "--N", "120", "--k", "3", "--alpha", "0.6", "--seed", "4"])
    assert code == EXIT_OK
    assert "termination=" in capsys.readouterr().out


def test_solve_invalid_kappa_names_constraint(capsys):
    code = run_cli(["solve", "--variant", "niht", "--kappa", "1.0", "--c", "0.05"])
    assert code == EXIT_CONFIG
    assert "kappa > 1/(1-c)" in capsys.readouterr().err


def test_solve_writes_json(tmp_path, capsys):
    out = tmp_path / "sol.json"
    code = run_cli(["solve", "--n", "40", "--N", "80", "--k", "2", "--alpha", "0.6",
                    "--seed", "1", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert len(payload["x"]) == 80
    assert payload["termination"]


def test_rip_command(capsys):
    assert run_cli(["rip", "--n", "10", "--N", "14", "--order", "3", "--seed", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "L=" in out and "U=" in out and "general_position=" in out


def test_phase_bound_writes_curve(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code = run_cli(["phase-bound", "--variant", "iht", "--grid-points", "100", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "delta,rho_hat,residual"
    assert len(lines) == 101


def test_phase_bound_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(["phase-bound", "--grid-points", "12", "--out", str(a)]) == EXIT_OK
    assert run_cli(["phase-bound", "--grid-points", "12", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_phase_bound_bad_table_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("not a table\n", encoding="utf-8")
    assert run_cli(["phase-bound", "--rip-table", str(bad), "--out", str(tmp_path / "c.csv")]) == EXIT_CONFIG


def test_stability_command(capsys):
    assert run_cli(["stability", "--delta", "0.5", "--rho", "0.008"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "xi=" in out and "a=" in out


def test_stability_undefined_exits_3(capsys):
    assert run_cli(["stability", "--delta", "0.5", "--rho", "0.4", "--alpha", "0.5"]) == EXIT_NUMERICAL


def test_mc_dist_with_config_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "kind": "mc_distribution", "n": 40, "k": 4, "overlap": 2,
        "trials": 500, "master_seed": 3, "sigma": 1.0,
    }), encoding="utf-8")
    out = tmp_path / "res.json"
    code = run_cli(["mc-dist", "--config", str(cfg), "--trials", "100", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["config"]["trials"] == 100  # flag override wins
    assert payload["summary"]["violations_42"] == 0


def test_mc_dist_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "kind": "mc_distribution", "n": 40, "k": 4, "overlap": 2,
        "trials": 10, "master_seed": 3, "mystery": True,
    }), encoding="utf-8")
    assert run_cli(["mc-dist", "--config", str(cfg)]) == EXIT_CONFIG
    assert "unknown config keys" in capsys.readouterr().err


def test_mc_error_stability_undefined_exits_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "kind": "mc_error_vs_xi", "n": 100, "delta": 0.5, "rho": 0.4,
        "sigma": 0.1, "trials": 3, "master_seed": 3,
        "solver": {"variant": "iht", "max_iters": 50},
    }), encoding="utf-8")
    assert run_cli(["mc-error", "--config", str(cfg)]) == EXIT_CONFIG


def test_mc_transition_small(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "kind": "mc_transition", "n": 30, "delta_grid": [0.5], "rho_grid": [0.05],
        "trials": 5, "master_seed": 4, "solver": {"variant": "niht", "max_iters": 500},
    }), encoding="utf-8")
    out = tmp_path / "res.json"
    assert run_cli(["mc-transition", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["cells"][0]["success_rate"] == 1.0


def test_help_exits_cleanly():
    assert run_cli(["--help"]) == EXIT_OK
    assert run_cli([]) == EXIT_USAGE
