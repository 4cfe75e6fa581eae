"""
End-to-end tests of the subnet-surgery command line on a tiny configuration.
"""

import importlib
import json
import logging

import numpy as np
import pandas as pd
import pytest
import yaml

from subnet_cli.config.run_config import RunConfig
from subnet_cli.main import build_parser, cmd_eval, load_run_config, main
from subnetwork.storage.serialization import load_subnetwork
from tensor_engine import Tensor

TINY_RUN = {
    "seed": 3,
    "task": {"modulus": 5, "split_fraction": 0.8},
    "model": {"n_layers": 2, "d_model": 8, "n_heads": 2, "d_mlp": 16},
    "base_training": {"epochs": 20, "learning_rate": 0.01, "log_every": 10},
    "discovery": {"epochs": 5, "log_every": 5, "l0_lambda": 1.0},
}


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(TINY_RUN), encoding="utf-8")
    return path


@pytest.fixture
def base_model(tmp_path, run_config):
    stem = tmp_path / "base"
    assert main(["--config", str(run_config), "train-base", "--out", str(stem)]) == 0
    return stem


def discover_args(run_config, base_model, out, *extra):
    return ["--config", str(run_config), "discover", "--model", str(base_model),
            "--out", str(out), *extra]


@pytest.mark.e2e
class TestTrainBase:

    def test_outputs(self, base_model):
        for suffix in (".json", ".bin", ".metrics.json"):
            assert base_model.with_name(base_model.name + suffix).exists()

    def test_deterministic(self, tmp_path, run_config, base_model):
        again = tmp_path / "again"
        assert main(["--config", str(run_config), "train-base", "--out", str(again)]) == 0
        assert (tmp_path / "again.bin").read_bytes() == (tmp_path / "base.bin").read_bytes()
        first = json.loads((tmp_path / "base.json").read_text())
        second = json.loads((tmp_path / "again.json").read_text())
        first.pop("weights_file"), second.pop("weights_file")
        assert first == second

    def test_metrics_match_eval(self, tmp_path, run_config, base_model):
        metrics = json.loads((tmp_path / "base.metrics.json").read_text())
        config = RunConfig.load(run_config)
        document = cmd_eval(config, base_model, None, "full", "test", "add")
        assert document["accuracy"] == metrics["accuracy"]["add"]["test"]
        assert document["fingerprint"] == metrics["fingerprint"]

    def test_non_finite_loss_exits_one(self, tmp_path, run_config, mocker):
        mocker.patch("model_core.core.training.answer_loss", return_value=Tensor(np.nan))
        stem = tmp_path / "broken"
        assert main(["--config", str(run_config), "train-base", "--out", str(stem)]) == 1
        assert (tmp_path / "broken.json").exists()
        assert not (tmp_path / "broken.metrics.json").exists()


@pytest.mark.e2e
class TestDiscover:

    def test_writes_mask_and_curve(self, tmp_path, run_config, base_model):
        out = tmp_path / "add.subnet.json"
        assert main(discover_args(run_config, base_model, out, "--task", "add")) == 0
        subnetwork = load_subnetwork(out)
        assert subnetwork.metadata["task"] == "add"
        assert subnetwork.metadata["seed"] == 3
        curve = pd.read_csv(tmp_path / "add.curve.csv")
        assert len(curve) == 5

    def test_deterministic(self, tmp_path, run_config, base_model):
        a, b = tmp_path / "a.subnet.json", tmp_path / "b.subnet.json"
        assert main(discover_args(run_config, base_model, a, "--task", "mul")) == 0
        assert main(discover_args(run_config, base_model, b, "--task", "mul")) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_magnitude_warns_about_epochs(self, tmp_path, run_config, base_model, caplog, mocker):
        mocker.patch.object(importlib.import_module("subnet_cli.main"), "setup_logging")
        out = tmp_path / "mag.subnet.json"
        args = discover_args(run_config, base_model, out, "--strategy", "magnitude",
                             "--prune-fraction", "0.5")
        with caplog.at_level(logging.WARNING):
            assert main(args) == 0
        assert any("epochs" in r.getMessage() and r.levelno == logging.WARNING for r in caplog.records)
        assert load_subnetwork(out).metadata["prune_fraction"] == 0.5

    def test_missing_model_exits_one(self, tmp_path, run_config):
        assert main(discover_args(run_config, tmp_path / "nothing", tmp_path / "x.subnet.json")) == 1


@pytest.mark.e2e
class TestEvalStatsViz:

    @pytest.fixture
    def masks(self, tmp_path, run_config, base_model):
        paths = []
        for task in ("add", "mul"):
            out = tmp_path / f"{task}.subnet.json"
            assert main(discover_args(run_config, base_model, out, "--task", task)) == 0
            paths.append(out)
        return paths

    def test_eval_modes(self, tmp_path, run_config, base_model, masks):
        out = tmp_path / "eval.json"
        args = ["--config", str(run_config), "eval", "--model", str(base_model), "--mask", str(masks[0]),
                "--mode", "complement", "--task", "add", "--out", str(out)]
        assert main(args) == 0
        document = json.loads(out.read_text())
        assert document["mode"] == "complement" and document["task"] == "add"

    def test_trained_head_saved_and_used(self, tmp_path, run_config, base_model, caplog, mocker):
        mocker.patch.object(importlib.import_module("subnet_cli.main"), "setup_logging")
        out = tmp_path / "probe.subnet.json"
        assert main(discover_args(run_config, base_model, out, "--probe")) == 0
        head = tmp_path / "probe.probe.npz"
        assert head.exists()

        config = RunConfig.load(run_config)
        with caplog.at_level(logging.WARNING):
            cmd_eval(config, base_model, out, "subnet", "train", "all")
        assert not any("missing" in r.getMessage() for r in caplog.records)

        head.unlink()
        with caplog.at_level(logging.WARNING):
            document = cmd_eval(config, base_model, out, "subnet", "train", "all")
        assert any("missing" in r.getMessage() for r in caplog.records)
        assert 0.0 <= document["accuracy"] <= 1.0

    def test_subnet_mode_needs_mask(self, run_config, base_model):
        args = ["--config", str(run_config), "eval", "--model", str(base_model), "--mode", "subnet"]
        assert main(args) == 1

    def test_stats_rows(self, tmp_path, masks):
        assert main(["stats", str(masks[0]), str(masks[1]), "--out", str(tmp_path / "overlap")]) == 0
        frame = pd.read_csv(tmp_path / "overlap.csv")
        assert len(frame) == 12 + 2 * 2 + 1
        report = json.loads((tmp_path / "overlap.json").read_text())
        assert report["rows"][-1]["scope"] == "total"

    def test_viz_counts_match_stats(self, tmp_path, base_model, masks):
        assert main(["stats", str(masks[0]), str(masks[1]), "--out", str(tmp_path / "overlap")]) == 0
        assert main(["viz", str(masks[0]), str(masks[1]), "--model", str(base_model),
                     "--out", str(tmp_path / "figure")]) == 0
        assert (tmp_path / "figure.svg").exists() and (tmp_path / "figure.summary.svg").exists()

        sidecar = json.loads((tmp_path / "figure.json").read_text())
        frame = pd.read_csv(tmp_path / "overlap.csv")
        heads = frame[frame["scope"] == "head"]
        drawn = {(p["layer"], p["head"]): p for p in sidecar["panels"] if p["head"] is not None}
        for _, row in heads.iterrows():
            panel = drawn[(row["layer"], int(row["head"]))]
            assert (panel["kept_a"], panel["kept_b"], panel["both"]) == \
                   (row["kept_a"], row["kept_b"], row["intersection"])

    def test_incompatible_masks_exit_one(self, tmp_path, masks):
        other = tmp_path / "other.subnet.json"
        document = json.loads(masks[1].read_text())
        document["fingerprint"] = "0" * 16
        other.write_text(json.dumps(document))
        assert main(["stats", str(masks[0]), str(other), "--out", str(tmp_path / "bad")]) == 1


@pytest.mark.unit
class TestArguments:

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main(["discover", "--bogus"])
        assert err.value.code == 2

    def test_flag_beats_file(self, run_config):
        args = build_parser().parse_args(["--config", str(run_config), "--seed", "9", "discover",
                                          "--model", "m", "--out", "o", "--l0-lambda", "0.25"])
        config = load_run_config(args)
        assert config.seed == 9
        assert config.discovery.l0_lambda == 0.25 and config.discovery.mask.l0_lambda == 0.25
        assert config.discovery.epochs == 5
        origins = {item.path: item.origin for item in config.overrides()}
        assert origins["seed"] == "flag" and origins["discovery.epochs"] == "file"

    def test_vocab_follows_modulus(self, run_config):
        assert RunConfig.load(run_config).model.vocab_size == 9

    def test_unknown_config_key_exits_one(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({"discovery": {"temperature": 2.0}}))
        assert main(["--config", str(path), "discover", "--model", "m", "--out", "o"]) == 1
