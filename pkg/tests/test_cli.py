"""Command-line behavior: artifact emission, determinism, the analyze
tables, and golden verification."""
from __future__ import annotations

import json

from click.testing import CliRunner

from timevault.cli import main

ARTIFACTS = ["cost.json", "offchain.json", "summary.json", "trace.log"]


def invoke(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env)


def test_run_bundled_scenario_writes_artifacts(tmp_path):
    out = tmp_path / "art"
    result = invoke("run", "opt_clean", "--out", str(out))
    assert result.exit_code == 0, result.output
    assert "opt_clean: SUCCESS via OPT" in result.output
    assert sorted(p.name for p in out.iterdir()) == ARTIFACTS
    summary = json.loads((out / "summary.json").read_text())
    assert summary["outcome"] == "SUCCESS"


def test_rerun_is_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert invoke("run", "pes_one_withholder", "--out", str(first)).exit_code == 0
    assert invoke("run", "pes_one_withholder", "--out", str(second)).exit_code == 0
    for name in ARTIFACTS:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_default_out_dir_comes_from_the_environment(tmp_path):
    result = invoke("run", "opt_clean",
                    env={"TIMEVAULT_OUT": str(tmp_path / "envout")})
    assert result.exit_code == 0, result.output
    assert (tmp_path / "envout" / "opt_clean" / "trace.log").is_file()


def test_run_seed_override(tmp_path):
    out = tmp_path / "seeded"
    result = invoke("run", "opt_clean", "--seed", "99", "--out", str(out))
    assert result.exit_code == 0
    assert "seed 99" in result.output
    assert json.loads((out / "summary.json").read_text())["seed"] == 99


def test_run_scenario_from_a_path(tmp_path):
    conf = tmp_path / "local.toml"
    conf.write_text(
        'version = 1\nseed = 3\n[registry]\nexecutors = 8\n'
        '[service]\ngroup_size = 2\nthreshold = 2\nshare_count = 3\n'
        'timer_start = 10\ntimer_end = 29\n'
        'payload = { kind = "transfer", to = "sink:x", value_ether = "1.0" }\n')
    out = tmp_path / "art"
    result = invoke("run", str(conf), "--out", str(out))
    assert result.exit_code == 0, result.output
    assert "local: SUCCESS" in result.output


def test_run_gas_schedule_override_changes_costs(tmp_path):
    cheap = tmp_path / "cheap.toml"
    cheap.write_text("ether_usd = 19.973\n")
    base, low = tmp_path / "base", tmp_path / "low"
    invoke("run", "opt_clean", "--out", str(base))
    result = invoke("run", "opt_clean", "--gas-schedule", str(cheap),
                    "--out", str(low))
    assert result.exit_code == 0, result.output
    usd = lambda d: json.loads((d / "cost.json").read_text())["total_usd"]
    assert usd(low) < usd(base) / 9


def test_run_unknown_scenario_fails(tmp_path):
    result = invoke("run", "no_such_scenario", "--out", str(tmp_path))
    assert result.exit_code != 0
    assert "no bundled scenario" in result.output


def test_run_malformed_scenario_fails(tmp_path):
    broken = tmp_path / "broken.toml"
    broken.write_text("version = [unclosed\n")
    result = invoke("run", str(broken), "--out", str(tmp_path / "x"))
    assert result.exit_code != 0
    assert "cannot parse" in result.output


def test_run_infeasible_scenario_fails(tmp_path):
    conf = tmp_path / "thin.toml"
    conf.write_text(
        'version = 1\n[registry]\nexecutors = 5\n'
        '[service]\ngroup_size = 2\nthreshold = 2\nshare_count = 3\n'
        'timer_start = 10\ntimer_end = 29\n'
        'payload = { kind = "transfer", to = "sink:x", value_ether = "1.0" }\n')
    result = invoke("run", str(conf), "--out", str(tmp_path / "x"))
    assert result.exit_code != 0
    assert "infeasible" in result.output


# -- analyze ---------------------------------------------------------------


def test_analyze_sybil_table():
    result = invoke("analyze", "sybil")
    assert result.exit_code == 0, result.output
    assert "optimal_fleet" in result.output
    # group size 2 against 100 honest: fleet 100, budget 160 ether
    assert "160.0000" in result.output


def test_analyze_sybil_with_trials():
    result = invoke("analyze", "sybil", "--group-size", "2,3",
                    "--trials", "300")
    assert result.exit_code == 0, result.output
    assert "within_3se" in result.output
    assert "yes" in result.output


def test_analyze_sybil_single_custodian_has_no_optimum():
    result = invoke("analyze", "sybil", "--group-size", "1")
    assert result.exit_code == 0
    assert "none" in result.output


def test_analyze_bribery_table():
    result = invoke("analyze", "bribery", "--targets", "1,3")
    assert result.exit_code == 0, result.output
    # deposit 1 each; rep 3 rebuild costs 4 * 0.01
    assert "2.0400" in result.output


def test_analyze_cost_reference_point():
    result = invoke("analyze", "cost", "--path", "opt", "--sizes", "30")
    assert result.exit_code == 0, result.output
    assert "9.2418" in result.output


def test_analyze_cost_slopes_line():
    result = invoke("analyze", "cost", "--sizes", "10:60:10")
    assert result.exit_code == 0
    assert "slopes:" in result.output
    assert "pool +0.0000/member" in result.output.lower()


def test_analyze_pooling_reference_points():
    result = invoke("analyze", "pooling", "--followers", "3,7,19")
    assert result.exit_code == 0, result.output
    for value in ("3.0894", "2.0640", "1.4488"):
        assert value in result.output


def test_analyze_out_writes_both_layouts(tmp_path):
    out = tmp_path / "reports"
    result = invoke("analyze", "pooling", "--followers", "0:3",
                    "--out", str(out))
    assert result.exit_code == 0
    assert (out / "pooling.txt").is_file()
    tsv = (out / "pooling.tsv").read_text()
    assert tsv.splitlines()[0].split("\t")[0] == "followers"


def test_bad_range_is_rejected():
    result = invoke("analyze", "cost", "--sizes", "60:10")
    assert result.exit_code != 0
    assert "bad range" in result.output


# -- goldens ---------------------------------------------------------------


def test_verify_golden_all_ok():
    result = invoke("verify-golden")
    assert result.exit_code == 0, result.output
    lines = [l for l in result.output.splitlines() if l.endswith(": OK")]
    assert len(lines) == 4


def test_verify_golden_single_scenario():
    result = invoke("verify-golden", "--scenario", "invoke_flag")
    assert result.exit_code == 0
    assert result.output.strip() == "invoke_flag: OK"


def test_version_flag():
    result = invoke("--version")
    assert result.exit_code == 0
    assert "timevault" in result.output
