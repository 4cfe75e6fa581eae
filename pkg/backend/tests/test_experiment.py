"""
Tests for the multitask experiment driver.
"""

import json

import pytest

from shared.errors import ConfigurationError
from subnet_cli.config.run_config import RunConfig
from subnet_cli.experiment import ExperimentReport, SeedOutcome, TaskOutcome, log_verdict, run_experiment

TINY_RUN = {
    "seed": 1,
    "task": {"modulus": 5, "split_fraction": 0.8},
    "model": {"n_layers": 2, "d_model": 8, "n_heads": 2, "d_mlp": 16},
    "base_training": {"epochs": 10, "learning_rate": 0.01},
    "discovery": {"epochs": 3},
}


def outcome(seed, retention, sparsity, blocks=None):
    tasks = {t: TaskOutcome(t, retention, 1.0, sparsity) for t in ("add", "mul")}
    return SeedOutcome(seed, tasks, blocks or {0: 0.4, 1: 0.2})


@pytest.mark.unit
class TestExperimentReport:

    def test_two_of_three_seeds_pass(self):
        report = ExperimentReport({"add": 1.0, "mul": 1.0},
                                  [outcome(0, 0.95, 0.7), outcome(1, 0.5, 0.7), outcome(2, 0.92, 0.6)])
        assert report.passing_seeds == [0, 2]
        assert report.passed

    def test_undertrained_base_fails(self):
        report = ExperimentReport({"add": 0.9, "mul": 1.0}, [outcome(s, 1.0, 0.9) for s in range(3)])
        assert not report.passed

    def test_dense_subnetworks_fail(self):
        report = ExperimentReport({"add": 1.0, "mul": 1.0}, [outcome(s, 1.0, 0.3) for s in range(3)])
        assert report.passing_seeds == []

    def test_overlap_ordering_only_warns(self, caplog):
        report = ExperimentReport({"add": 1.0, "mul": 1.0},
                                  [outcome(s, 1.0, 0.9, {0: 0.1, 1: 0.3}) for s in range(3)])
        log_verdict(report)
        assert report.passed
        assert any(r.levelname == "WARNING" and "layer 0 overlap" in r.getMessage() for r in caplog.records)


@pytest.mark.integration
class TestRunExperiment:

    def test_writes_every_artifact(self, tmp_path):
        report = run_experiment(RunConfig.from_dict(TINY_RUN), tmp_path, seeds=(0,))
        for name in ("base.json", "base.bin", "seed0-add.subnet.json", "seed0-mul.curve.csv",
                     "seed0-overlap.csv", "seed0-figure.svg", "seed0-figure.summary.svg"):
            assert (tmp_path / name).exists()
        assert sorted(report.seeds[0].block_jaccard) == [0, 1]
        json.dumps(report.to_dict())

    def test_rejects_magnitude(self, tmp_path):
        run = {**TINY_RUN, "discovery": {"mask": {"strategy": "magnitude", "prune_fraction": 0.5}}}
        with pytest.raises(ConfigurationError):
            run_experiment(RunConfig.from_dict(run), tmp_path)
