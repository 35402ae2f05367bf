"""Tests for the experiment registry and the pre-registered scenes."""

import math

import pytest

from logpot.config import ToolkitSettings
from logpot.experiments import (
    CriterionResult,
    Experiment,
    ExperimentOutcome,
    ExperimentRegistry,
    Outcome,
    get_experiment_registry,
)
from logpot.experiments import scenes
from logpot.experiments.bw import CASES
from logpot.expressions import parse_function


class StubExperiment(Experiment):
    @property
    def id(self) -> str:
        return "stub"

    @property
    def title(self) -> str:
        return "Stub"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        return ExperimentOutcome(criteria=[CriterionResult.check("always", True)])


class TestRegistry:
    """Discovery of the experiment modules."""

    def test_all_experiments_discovered(self):
        registry = get_experiment_registry()
        assert registry.ids() == ["bw", "ex1a", "ex1b", "ex1c", "ex1d", "ex1e", "ex2", "ex3"]
        assert all(e.title for e in registry.get_all())

    def test_unknown_id(self):
        assert get_experiment_registry().get("ex9") is None

    def test_register_by_class(self):
        registry = ExperimentRegistry()
        registry.register(StubExperiment)
        assert registry.ids() == ["stub"]
        assert registry.get("stub").run(ToolkitSettings()).passed


class TestOutcomes:
    def test_measured_does_not_fail(self):
        outcome = ExperimentOutcome(
            criteria=[CriterionResult.check("a", True), CriterionResult.measured("b", "reported", 1.5)]
        )
        assert outcome.passed
        assert outcome.verdicts() == {"a": "pass", "b": "measured"}

    def test_failed_check(self):
        outcome = ExperimentOutcome(criteria=[CriterionResult.check("a", False, "too large", 2.0)])
        assert not outcome.passed
        assert outcome.criteria[0].outcome is Outcome.FAIL
        assert outcome.criteria[0].to_dict() == {"outcome": "fail", "detail": "too large", "value": 2.0}


class TestScenes:
    """Scenes built through the same path as scene files."""

    def test_half_and_half_mass(self, settings):
        ws = scenes.load(settings, scenes.annulus(), 128, scenes.half_and_half(), scenes.origin())
        # 1/2 (2 pi) + 1/2 (pi)
        assert ws.require_measure().total_mass == pytest.approx(1.5 * math.pi)
        assert ws.require_poles().size == 1

    def test_resolution_is_pinned(self, settings):
        ws = scenes.load(settings.with_overrides(resolution=1024), scenes.circle(), 64)
        assert ws.K.size == 64

    def test_filled_annulus(self):
        assert not scenes.annulus(filled=True).boundary_only

    def test_rate_cases_parse(self):
        for case in CASES:
            parse_function(case.expression)


@pytest.mark.slow
class TestRuns:
    """Full runs of the cheaper experiments."""

    @pytest.mark.parametrize("experiment_id", ["ex1a", "ex1c"])
    def test_experiment_passes(self, experiment_id, settings):
        outcome = get_experiment_registry().get(experiment_id).run(settings)
        failed = [c.name for c in outcome.criteria if c.outcome is Outcome.FAIL]
        assert outcome.passed, failed
