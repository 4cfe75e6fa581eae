"""
Full-size multitask experiment with the default configuration (p = 11,
2-layer transformer). Run with --run-slow.
"""

import pytest

from subnet_cli.config.run_config import RunConfig
from subnet_cli.experiment import log_verdict, run_experiment


@pytest.mark.performance
class TestMultitaskExperiment:

    def test_default_configuration(self, tmp_path):
        report = run_experiment(RunConfig.from_dict({}), tmp_path, seeds=(0, 1, 2))
        log_verdict(report)

        assert report.base_trained, report.train_accuracy
        assert len(report.passing_seeds) >= 2, report.to_dict()
        for seed in report.seeds:
            assert (tmp_path / f"seed{seed.seed}-overlap.csv").exists()
            assert (tmp_path / f"seed{seed.seed}-figure.svg").exists()
