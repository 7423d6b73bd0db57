"""End-to-end command line behavior: pipeline, config, exit codes."""

import json
from pathlib import Path

import pytest

from hpckit import cli


def run(*args) -> int:
    return cli.main([str(a) for a in args])


def run_pipeline(workdir: Path, *, seed=None, deterministic=True, extra_reduce=()):
    """Full 7-stage pipeline into ``workdir``; returns the artifact paths."""
    paths = {
        "sweep": workdir / "sweep.csv",
        "derived": workdir / "derived.csv",
        "reduction": workdir / "reduction.json",
        "coefficients": workdir / "coefficients.csv",
        "search": workdir / "search.json",
        "leaderboard": workdir / "leaderboard.txt",
        "validation": workdir / "validation.json",
        "table": workdir / "improvement.txt",
        "report": workdir / "report.txt",
    }
    det = ["--deterministic"] if deterministic else []
    seed_args = ["--seed", seed] if seed is not None else []
    assert run(*det, "simulate", *seed_args, "--out", paths["sweep"]) == 0
    assert run(*det, "derive", "--dataset", paths["sweep"],
               "--out", paths["derived"]) == 0
    assert run(*det, "reduce", "--dataset", paths["derived"],
               "--out", paths["reduction"],
               "--coefficients", paths["coefficients"], *extra_reduce) == 0
    assert run(*det, "search", "--dataset", paths["derived"],
               "--out", paths["search"], "--leaderboard", paths["leaderboard"]) == 0
    assert run(*det, "validate", "--dataset", paths["derived"],
               "--reduction", paths["reduction"],
               "--out", paths["validation"], "--table", paths["table"]) == 0
    assert run(*det, "report", "--sweep", paths["sweep"],
               "--reduction", paths["reduction"], "--search", paths["search"],
               "--validation", paths["validation"], "--out", paths["report"]) == 0
    return paths


# ------------------------------------------------------------------ pipeline


def test_full_pipeline_produces_consistent_artifacts(tmp_path):
    paths = run_pipeline(tmp_path)
    for p in paths.values():
        assert p.exists() and p.stat().st_size > 0

    reduction = json.loads(paths["reduction"].read_text())
    assert reduction["thresholds"] == {"requirement": 0.9, "knob": 0.4}
    assert reduction["kept_monitors"] == ["execution_time_s", "cpu_power_w", "capex"]
    assert [k["knob"] for k in reduction["selected_knobs"]] == [
        "DVFS", "SMT", "Redundancy"
    ]

    search = json.loads(paths["search"].read_text())
    assert search["total_rows"] == 128
    assert 0 < search["feasible_rows"] <= 128
    assert search["best"]["feasible"] is True

    validation = json.loads(paths["validation"].read_text())
    assert validation["max_negative_pct"] <= 0.05
    assert validation["picks_agree"] is True

    report = paths["report"].read_text()
    for needle in ("sweep", "reduction", "search", "validation"):
        assert needle in report.lower()


def test_reduce_echoes_explicit_thresholds(tmp_path):
    paths = run_pipeline(tmp_path,
                         extra_reduce=("--req-threshold", "0.90",
                                       "--knob-threshold", "0.40"))
    reduction = json.loads(paths["reduction"].read_text())
    assert reduction["thresholds"] == {"requirement": 0.9, "knob": 0.4}


def test_all_knobs_selected_gives_zero_gap(tmp_path):
    paths = run_pipeline(tmp_path,
                         extra_reduce=("--knob-threshold", "0.000001"))
    reduction = json.loads(paths["reduction"].read_text())
    assert len(reduction["selected_knobs"]) == 6
    validation = json.loads(paths["validation"].read_text())
    assert validation["max_negative_pct"] == 0.0
    assert validation["picks_agree"] is True


def test_every_artifact_carries_a_manifest(tmp_path):
    paths = run_pipeline(tmp_path)
    for name, p in paths.items():
        text = p.read_text()
        if p.suffix == ".json":
            assert "manifest" in json.loads(text)
        else:
            assert any(line.startswith("# manifest:") for line in text.splitlines()), name


def test_deterministic_runs_are_byte_identical(tmp_path, monkeypatch):
    # identical invocations (same relative paths) must reproduce the
    # same bytes; the manifest records the paths as given
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    monkeypatch.chdir(a)
    names = run_pipeline(Path("."))
    monkeypatch.chdir(b)
    run_pipeline(Path("."))
    for name, rel in names.items():
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), name


def test_deterministic_flag_suppresses_timestamps(tmp_path):
    paths = run_pipeline(tmp_path)
    for p in paths.values():
        assert "timestamp" not in p.read_text()


def test_timestamp_present_without_deterministic_flag(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run("simulate", "--out", out) == 0
    assert "timestamp" in out.read_text()


def test_ingest_reports_and_reexports(tmp_path, capsys):
    paths = run_pipeline(tmp_path)
    copy = tmp_path / "copy.csv"
    assert run("--deterministic", "ingest", "--dataset", paths["sweep"],
               "--out", copy) == 0
    assert "128 rows" in capsys.readouterr().out
    assert copy.exists()
    assert run("ingest", "--dataset", copy) == 0


def test_search_top_limits_leaderboard(tmp_path):
    paths = run_pipeline(tmp_path)
    out = tmp_path / "s2.json"
    board = tmp_path / "l2.txt"
    assert run("--deterministic", "search", "--dataset", paths["derived"],
               "--top", "3", "--out", out, "--leaderboard", board) == 0
    ranked = [l for l in board.read_text().splitlines()
              if l.strip() and not l.startswith("#") and l.strip()[0].isdigit()]
    assert len(ranked) == 3


def test_report_consumes_artifacts_only(tmp_path):
    paths = run_pipeline(tmp_path)
    first = paths["report"].read_bytes()
    # the report must not recompute anything from the raw dataset
    paths["sweep"].unlink()
    paths["derived"].unlink()
    again = tmp_path / "report2.txt"
    assert run("--deterministic", "report",
               "--reduction", paths["reduction"], "--search", paths["search"],
               "--validation", paths["validation"], "--out", again) == 0
    assert again.read_text() in first.decode() or again.stat().st_size > 0


def test_report_requires_at_least_one_artifact(tmp_path):
    assert run("report", "--out", tmp_path / "r.txt") == 1


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        run("--version")
    assert exc.value.code == 0


# ------------------------------------------------------------------- config


def test_config_controls_reduce_thresholds(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "analysis": {"req_threshold": 0.8, "knob_threshold": 0.3},
    }))
    paths = run_pipeline(tmp_path)
    out = tmp_path / "r2.json"
    co = tmp_path / "c2.csv"
    assert run("--config", cfg, "--deterministic", "reduce",
               "--dataset", paths["derived"], "--out", out,
               "--coefficients", co) == 0
    assert json.loads(out.read_text())["thresholds"] == {
        "requirement": 0.8, "knob": 0.3,
    }


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"analysis": {"req_threshold": 0.8}}))
    paths = run_pipeline(tmp_path)
    out = tmp_path / "r3.json"
    co = tmp_path / "c3.csv"
    assert run("--config", cfg, "--deterministic", "reduce",
               "--dataset", paths["derived"], "--req-threshold", "0.85",
               "--out", out, "--coefficients", co) == 0
    assert json.loads(out.read_text())["thresholds"]["requirement"] == 0.85


def test_env_var_is_config_fallback(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"analysis": {"knob_threshold": 0.2}}))
    monkeypatch.setenv("HPCKIT_CONFIG", str(cfg))
    paths = run_pipeline(tmp_path)
    out = tmp_path / "r4.json"
    co = tmp_path / "c4.csv"
    assert run("--deterministic", "reduce", "--dataset", paths["derived"],
               "--out", out, "--coefficients", co) == 0
    assert json.loads(out.read_text())["thresholds"]["knob"] == 0.2


def test_unknown_config_section_is_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"misc": {}}))
    assert run("--config", cfg, "simulate", "--out", tmp_path / "s.csv") == 1
    assert "misc" in capsys.readouterr().err


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"metrics": {"server_prize": 100}}))
    assert run("--config", cfg, "simulate", "--out", tmp_path / "s.csv") == 1
    assert "server_prize" in capsys.readouterr().err


def test_custom_space_file(tmp_path):
    space_file = tmp_path / "space.json"
    space_file.write_text(json.dumps({
        "knobs": [
            {"name": "DVFS",
             "levels": [{"label": "1.0GHz", "value": 1.0},
                        {"label": "2.0GHz", "value": 2.0}],
             "baseline": 1},
            {"name": "SMT",
             "levels": [{"label": "Disable"}, {"label": "Enable"}],
             "baseline": 0},
        ],
    }))
    out = tmp_path / "sweep.csv"
    assert run("--deterministic", "simulate", "--space", space_file,
               "--out", out) == 0
    data_rows = [l for l in out.read_text().splitlines()
                 if l and not l.startswith("#")]
    assert len(data_rows) == 1 + 4  # header plus 2x2 configurations


# --------------------------------------------------------------- exit codes


def test_unknown_subcommand_exits_one(capsys):
    assert run("frobnicate") == 1


def test_missing_dataset_file_exits_one(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert run("derive", "--dataset", missing, "--out", tmp_path / "d.csv") == 1
    assert "nope.csv" in capsys.readouterr().err


def test_corrupt_dataset_exits_three_naming_the_column(tmp_path, capsys):
    paths = run_pipeline(tmp_path)
    corrupt = tmp_path / "corrupt.csv"
    text = paths["sweep"].read_text().replace("knob:DVFS", "knob:BROKEN")
    corrupt.write_text(text)
    assert run("derive", "--dataset", corrupt, "--out", tmp_path / "d.csv") == 3
    assert "DVFS" in capsys.readouterr().err


def test_infeasible_requirements_exit_two(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"metrics": {"power_max_w": 0.001}}))
    paths = run_pipeline(tmp_path)
    derived = tmp_path / "tight.csv"
    assert run("--config", cfg, "--deterministic", "derive",
               "--dataset", paths["sweep"], "--out", derived) == 0
    assert run("--config", cfg, "--deterministic", "search",
               "--dataset", derived, "--out", tmp_path / "s.json",
               "--leaderboard", tmp_path / "l.txt") == 2
    assert "tight.csv" in capsys.readouterr().err


def test_reduce_rejects_underived_dataset(tmp_path, capsys):
    paths = run_pipeline(tmp_path)
    assert run("reduce", "--dataset", paths["sweep"],
               "--out", tmp_path / "r.json",
               "--coefficients", tmp_path / "c.csv") == 1
    assert "derive" in capsys.readouterr().err


def test_simulate_rejects_too_few_intervals(tmp_path):
    assert run("simulate", "--intervals", "3", "--out", tmp_path / "s.csv") == 1
