"""Command-line behavior: formats, exit codes, reproducibility."""

import json

import pytest
from click.testing import CliRunner

from mealypred import serialize_machine
from mealypred.cli import main
from mealypred.machines import (
    alternating_ring,
    constant_machine,
    echo_machine,
    eight_state_example,
)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, machine in [
        ("demo8", eight_state_example()),
        ("echo", echo_machine()),
        ("const0", constant_machine(0)),
        ("const1", constant_machine(1)),
        ("altring", alternating_ring()),
    ]:
        p = tmp_path / f"{name}.mealy"
        p.write_text(serialize_machine(machine))
        paths[name] = str(p)
    return paths


def run_json(runner, args):
    result = runner.invoke(main, args + ["--format", "json"])
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


class TestRun:
    def test_demo8_trace(self, runner, files):
        report = run_json(runner, ["run", "-m", files["demo8"], "--input", "001111"])
        assert report["result"]["output"] == "000100"
        assert report["result"]["state_path"] == [0, 1, 4, 5, 7, 0, 2]

    def test_constant_zero(self, runner, files):
        report = run_json(runner, ["run", "-m", files["const0"], "--input", "11111111"])
        assert report["result"]["output"] == "00000000"

    def test_empty_input(self, runner, files):
        report = run_json(runner, ["run", "-m", files["const0"], "--input", ""])
        assert report["result"]["output"] == ""
        assert report["result"]["state_path"] == [0]

    def test_stdin_machine(self, runner):
        result = runner.invoke(
            main,
            ["run", "-m", "-", "--input", "01"],
            input=serialize_machine(constant_machine(1)),
        )
        assert result.exit_code == 0
        assert "11" in result.output


class TestAnalyze:
    def test_alternating_ring_all_biased(self, runner, files):
        report = run_json(runner, ["analyze", "-m", files["altring"]])
        assert report["result"]["unbiased_states"] == []
        assert report["result"]["perfect_knowledge_bound"] == 0.0

    def test_echo(self, runner, files):
        report = run_json(runner, ["analyze", "-m", files["echo"]])
        assert report["result"]["unbiased_states"] == [0, 1]
        assert report["result"]["stationary"]["weights"] == [0.5, 0.5]
        assert report["result"]["perfect_knowledge_bound"] == 0.5

    def test_unreachable_flagged(self, runner, tmp_path):
        text = "mealy 2\ninitial 0\n0 0 -> 0 0\n0 1 -> 0 0\n1 0 -> 1 0\n1 1 -> 1 1\n"
        p = tmp_path / "u.mealy"
        p.write_text(text)
        report = run_json(runner, ["analyze", "-m", str(p)])
        states = report["result"]["states"]
        assert states[1]["reachable"] is False
        assert states[1]["frequency"] == 0.0


class TestEvaluate:
    def test_exhaustive_echo(self, runner, files):
        report = run_json(runner, ["evaluate", "-m", files["echo"], "-t", "10"])
        assert report["result"]["e_ave"] == "1/2"
        assert report["result"]["method"] == "exhaustive"

    def test_monte_carlo_embeds_seed(self, runner, files):
        report = run_json(
            runner,
            ["evaluate", "-m", files["echo"], "-t", "16", "--method", "monte-carlo",
             "--samples", "200", "--seed", "5"],
        )
        assert report["result"]["samples"] == 200
        assert report["result"]["seed"] == 5
        assert report["config"]["seed"] == 5

    def test_cap_exit_code(self, runner, files):
        result = runner.invoke(main, ["evaluate", "-m", files["echo"], "-t", "25"])
        assert result.exit_code == 3

    def test_cap_raise_needs_acknowledgment(self, runner, files):
        result = runner.invoke(
            main, ["evaluate", "-m", files["echo"], "-t", "25", "--cap-t", "26"]
        )
        assert result.exit_code == 2


class TestExitCodes:
    def test_parse_error(self, runner, tmp_path):
        p = tmp_path / "bad.mealy"
        p.write_text("mealy 2\ninitial 0\n0 0 -> 9 0\n")
        result = runner.invoke(main, ["run", "-m", str(p), "--input", "0"])
        assert result.exit_code == 2

    def test_missing_file(self, runner):
        result = runner.invoke(main, ["run", "-m", "/nonexistent", "--input", "0"])
        assert result.exit_code == 2

    def test_inconsistent_observation(self, runner, files):
        result = runner.invoke(
            main,
            ["predict", "-m", files["const1"], "--predictor-machine",
             files["const0"], "--input", "111"],
        )
        assert result.exit_code == 4

    def test_inconsistent_training(self, runner, files):
        result = runner.invoke(
            main,
            ["batch-select", "--candidates", files["const0"], "--training", "01",
             "--horizon", "6"],
        )
        assert result.exit_code == 4

    def test_bad_bits(self, runner, files):
        result = runner.invoke(main, ["run", "-m", files["const0"], "--input", "01x"])
        assert result.exit_code == 2


class TestPredict:
    def test_consistency_trace(self, runner, files):
        report = run_json(
            runner, ["predict", "-m", files["altring"], "--input", "1100"]
        )
        assert report["result"]["observed"] == "0101"
        assert report["result"]["total_errors"] == 0

    def test_ensemble(self, runner, files):
        report = run_json(
            runner,
            ["predict", "-m", files["const0"], "--input", "111", "--predictor",
             "ensemble", "--candidates", files["const0"], "--candidates",
             files["const1"]],
        )
        assert report["result"]["consistent"] is True
        assert report["result"]["predictions"] == "000"


class TestEnumerateCmd:
    def test_count_only_raw(self, runner):
        report = run_json(runner, ["enumerate", "-k", "2", "--mode", "raw", "--count-only"])
        assert report["result"]["count"] == 256

    def test_count_only_human_is_bare(self, runner):
        result = runner.invoke(main, ["enumerate", "-k", "2", "--mode", "raw", "--count-only"])
        assert result.output == "256\n"

    def test_human_streams_records(self, runner):
        result = runner.invoke(main, ["enumerate", "-k", "1", "--mode", "raw"])
        records = [r for r in result.output.split("\n\n") if r.strip()]
        assert len(records) == 4
        assert all(r.startswith("mealy 1") for r in records)

    def test_stream_machines(self, runner):
        report = run_json(runner, ["enumerate", "-k", "1", "--mode", "canonical"])
        assert report["result"]["count"] == 4
        assert len(report["result"]["machines"]) == 4

    def test_cap_refusal(self, runner):
        result = runner.invoke(main, ["enumerate", "-k", "6", "--count-only"])
        assert result.exit_code == 3


class TestBatchSelectCmd:
    def test_toy_selects_always_zero(self, runner, files):
        report = run_json(
            runner,
            ["batch-select", "--candidates", files["const0"], "--candidates",
             files["const1"], "--training", "0000", "--horizon", "8"],
        )
        assert report["result"]["best_label"] == "always-0"


class TestSearchCmd:
    def test_search_report(self, runner, files):
        report = run_json(
            runner, ["search", "--target", files["altring"], "-k", "2", "-t", "8"]
        )
        assert report["result"]["best_score_float"] <= 0.125
        assert "mealy 2" in report["result"]["best_machine"]


class TestReproducibility:
    def test_json_byte_identical_across_runs(self, runner, files):
        args = ["evaluate", "-m", files["echo"], "-t", "12", "--format", "json"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.output == b.output

    def test_workers_do_not_change_output(self, runner, files):
        base = ["evaluate", "-m", files["echo"], "--predictor", "known-state",
                "-t", "12", "--format", "json"]
        a = runner.invoke(main, base + ["--workers", "1"])
        b = runner.invoke(main, base + ["--workers", "8"])
        assert a.output == b.output

    def test_replay_round_trips(self, runner, files, tmp_path):
        args = ["evaluate", "-m", files["echo"], "-t", "10", "--format", "json"]
        first = runner.invoke(main, args)
        report_path = tmp_path / "report.json"
        report_path.write_text(first.output)
        replayed = runner.invoke(main, ["replay", str(report_path), "--format", "json"])
        assert replayed.exit_code == 0
        assert replayed.output == first.output

    def test_config_round_trips(self, runner, files):
        report = run_json(runner, ["evaluate", "-m", files["echo"], "-t", "10"])
        assert json.loads(json.dumps(report["config"])) == report["config"]

    def test_human_format_has_no_timestamp_by_default(self, runner, files):
        result = runner.invoke(main, ["run", "-m", files["const0"], "--input", "01"])
        assert "time:" not in result.output
        stamped = runner.invoke(
            main, ["run", "-m", files["const0"], "--input", "01", "--timestamps"]
        )
        assert "time:" in stamped.output

    def test_report_schema_is_fixed(self, runner, files):
        report = run_json(runner, ["evaluate", "-m", files["echo"], "-t", "8"])
        assert list(report) == ["tool", "version", "command", "config", "machines", "result"]
        assert list(report["machines"][0]) == ["path", "id", "states"]
        assert "workers" not in json.dumps(report)
