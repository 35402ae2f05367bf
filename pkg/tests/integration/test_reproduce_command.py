"""Integration tests for the reproduce command."""

from unittest.mock import patch

import pytest
from typer.testing import CliRunner

from logpot.cli import app
from logpot.config import ToolkitSettings
from logpot.experiments import CriterionResult, Experiment, ExperimentOutcome, ExperimentRegistry


class PassingExperiment(Experiment):
    @property
    def id(self) -> str:
        return "good"

    @property
    def title(self) -> str:
        return "Always passes"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        return ExperimentOutcome(
            results={"value": 1.0},
            tables={"rows": [{"k": 1, "value": 1.0}]},
            criteria=[CriterionResult.check("ok", True, "fine", 1.0), CriterionResult.measured("seen", "", 2.0)],
        )


class FailingExperiment(PassingExperiment):
    @property
    def id(self) -> str:
        return "bad"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        return ExperimentOutcome(criteria=[CriterionResult.check("ok", False, "too far", 3.0)])


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def registry():
    """A registry holding one passing and one failing experiment."""
    registry = ExperimentRegistry()
    registry.register(PassingExperiment)
    registry.register(FailingExperiment)
    with patch("logpot.commands.reproduce.get_experiment_registry", return_value=registry):
        yield registry


class TestReproduceCommand:
    def test_list(self, runner):
        result = runner.invoke(app, ["reproduce", "--list"])
        assert result.exit_code == 0
        for experiment_id in ("ex1a", "ex1e", "ex2", "ex3", "bw"):
            assert experiment_id in result.stdout

    def test_no_ids(self, runner):
        result = runner.invoke(app, ["reproduce"])
        assert result.exit_code == 2
        assert "No experiment given" in result.stdout

    def test_unknown_id(self, runner):
        result = runner.invoke(app, ["reproduce", "ex9"])
        assert result.exit_code == 2
        assert "unknown experiment" in result.stdout

    def test_passing_experiment_writes_report(self, runner, registry, temp_dir):
        out = temp_dir / "out"
        result = runner.invoke(app, ["-o", str(out), "reproduce", "good"])
        assert result.exit_code == 0, result.stdout
        assert "PASS" in result.stdout
        assert "All 1 experiment(s) passed" in result.stdout
        [report] = list(out.glob("reproduce-good-*.json"))
        assert list(out.glob("reproduce-good-*-rows.csv"))
        assert '"ok": "pass"' in report.read_text()

    def test_failing_experiment_exits_3(self, runner, registry, temp_dir):
        result = runner.invoke(app, ["-o", str(temp_dir / "out"), "reproduce", "all"])
        assert result.exit_code == 3
        assert "Failed" in result.stdout
        assert "bad" in result.stdout
