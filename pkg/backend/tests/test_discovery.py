"""
Tests for subnetwork discovery, the magnitude baseline, probing and evaluation.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from shared.errors import ConfigurationError, ModelNotFrozenError, NonFiniteLossError
from discovery.config.discovery_config import DiscoveryConfig
from discovery.core.evaluator import EvalMode, evaluate
from discovery.core.trainer import baseline_discover, discover, lambda_sweep, probe_discover
from discovery.models.results import CURVE_COLUMNS
from arithmetic_tasks.core.generator import filter_task
from arithmetic_tasks.models.dataset import TaskName
from masking.config.mask_config import Granularity, MaskConfig
from masking.core.masked_layer import MaskedLayer
from model_core.core.transformer import build_transformer
from subnetwork.models.subnetwork import all_ones
from tensor_engine import Tensor


def config(**overrides):
    values = {"epochs": 5, "log_every": 5}
    values.update(overrides)
    return DiscoveryConfig(**values)


def weights_of(model):
    return {name: data.copy() for name, data in model.weight_snapshot().items()}


def assert_unchanged(model, before):
    for name, data in model.weight_snapshot().items():
        assert np.max(np.abs(data - before[name])) == 0.0


@pytest.mark.unit
class TestDiscoveryConfig:

    def test_l0_lambda_syncs_into_mask(self):
        c = DiscoveryConfig(l0_lambda=2.5)
        assert c.mask.l0_lambda == 2.5 and c.l0_lambda == 2.5

    def test_mask_lambda_used_by_default(self):
        assert DiscoveryConfig(mask=MaskConfig(l0_lambda=0.7)).l0_lambda == 0.7

    def test_probe_with_magnitude_rejected(self):
        with pytest.raises(ValidationError):
            DiscoveryConfig(probe_mode=True, mask=MaskConfig(strategy="magnitude", prune_fraction=0.5))

    def test_frozen_masks_need_probe(self):
        with pytest.raises(ValidationError):
            DiscoveryConfig(freeze_masks=True)

    def test_all_means_every_task(self):
        assert DiscoveryConfig(task="all").task is None
        assert DiscoveryConfig(task="mul").task is TaskName.MUL


@pytest.mark.integration
class TestDiscover:

    def test_freeze_contract_and_outputs(self, tiny_model, small_train):
        before = weights_of(tiny_model)
        result = discover(tiny_model, small_train, config(task="add"))
        assert_unchanged(tiny_model, before)
        result.subnetwork.validate_against(tiny_model)
        assert len(result.curve) == 5
        assert list(result.curve_frame().columns) == CURVE_COLUMNS
        assert result.subnetwork.metadata["task"] == "add"
        assert result.subnetwork.metadata["strategy"] == "hard_concrete"

    def test_same_seed_same_masks(self, tiny_model, small_train):
        a = discover(tiny_model, small_train, config(seed=4)).subnetwork
        b = discover(tiny_model, small_train, config(seed=4)).subnetwork
        assert a.mask_equal(b)
        assert [r.task_loss for r in discover(tiny_model, small_train, config(seed=4)).curve] == \
               [r.task_loss for r in discover(tiny_model, small_train, config(seed=4)).curve]

    def test_no_pressure_keeps_everything(self, tiny_model, small_train):
        result = discover(tiny_model, small_train, config(epochs=20, l0_lambda=0.0))
        assert result.metrics["sparsity"] < 0.05

    def test_strong_pressure_prunes_nearly_everything(self, tiny_model, small_train):
        result = discover(tiny_model, small_train, config(epochs=60, l0_lambda=1000.0, learning_rate=0.2))
        assert result.metrics["sparsity"] > 0.95

    def test_continuous_sparsification(self, tiny_model, small_train):
        c = config(mask=MaskConfig(strategy="continuous_sparsification"), epochs=4, batch_size=16)
        before = weights_of(tiny_model)
        result = discover(tiny_model, small_train, c)
        assert_unchanged(tiny_model, before)
        assert result.subnetwork.metadata["strategy"] == "continuous_sparsification"
        assert all(0.0 <= r.soft_sparsity <= 1.0 for r in result.curve)

    def test_continuous_sparsification_binarizes(self, tiny_model, small_train):
        c = config(mask=MaskConfig(strategy="continuous_sparsification", l0_lambda=1.0), epochs=20, seed=2)
        result = discover(tiny_model, small_train, c)
        assert result.metrics["binarized_fraction"] >= 0.99

    def test_hard_concrete_reports_no_binarization(self, tiny_model, small_train):
        assert "binarized_fraction" not in discover(tiny_model, small_train, config()).metrics

    @pytest.mark.parametrize("strategy", ["hard_concrete", "continuous_sparsification"])
    def test_objective_is_task_plus_weighted_l0(self, tiny_model, small_train, strategy):
        c = config(mask=MaskConfig(strategy=strategy), l0_lambda=0.37)
        for record in discover(tiny_model, small_train, c).curve:
            assert abs(record.total_loss - (record.task_loss + 0.37 * record.l0_value)) <= 1e-12

    def test_neuron_granularity(self, tiny_model, small_train):
        result = discover(tiny_model, small_train, config(mask=MaskConfig(granularity="neuron")))
        assert result.subnetwork.masks["layer0.mlp.fc1"].shape == (16,)

    def test_mlp_architecture(self, tiny_mlp, small_train):
        result = discover(tiny_mlp, small_train, config())
        assert result.subnetwork.n_heads is None
        assert result.subnetwork.layer_ids == ["layer0.mlp.fc", "layer1.mlp.fc"]

    def test_unfrozen_model_rejected(self, tiny_config, small_train):
        model = build_transformer(tiny_config, seed=0)
        with pytest.raises(ModelNotFrozenError):
            discover(model, small_train, config())

    def test_magnitude_strategy_rejected(self, tiny_model, small_train):
        c = config(mask=MaskConfig(strategy="magnitude", prune_fraction=0.5))
        with pytest.raises(ConfigurationError):
            discover(tiny_model, small_train, c)

    def test_non_finite_penalty(self, tiny_model, small_train, mocker):
        mocker.patch.object(MaskedLayer, "l0_penalty", return_value=Tensor(np.nan))
        with pytest.raises(NonFiniteLossError) as err:
            discover(tiny_model, small_train, config())
        assert err.value.diagnostics["epoch"] == 1
        assert set(err.value.diagnostics) >= {"task_loss", "l0_value", "non_finite_mask_params"}


@pytest.mark.integration
class TestBaselineDiscover:

    def magnitude(self, fraction):
        return config(mask=MaskConfig(strategy="magnitude", prune_fraction=fraction))

    def test_fraction_zero_is_full_model(self, tiny_model, small_train):
        result = baseline_discover(tiny_model, self.magnitude(0.0), small_train)
        full = evaluate(tiny_model, None, small_train, EvalMode.FULL)
        assert result.metrics["subnet_accuracy"] == full.accuracy
        assert result.curve == []

    def test_fraction_one_is_empty(self, tiny_model):
        assert baseline_discover(tiny_model, self.magnitude(1.0)).subnetwork.kept() == 0

    def test_sweep_is_monotone(self, tiny_model):
        kept = [baseline_discover(tiny_model, self.magnitude(f / 10)).subnetwork.kept() for f in range(1, 10)]
        assert all(b <= a for a, b in zip(kept, kept[1:]))

    def test_needs_fraction(self, tiny_model):
        with pytest.raises(ConfigurationError):
            baseline_discover(tiny_model, config(mask=MaskConfig(strategy="magnitude")))


@pytest.mark.integration
class TestProbeDiscover:

    def test_probe_trains_base_stays(self, tiny_model, small_train):
        before = weights_of(tiny_model)
        result = probe_discover(tiny_model, small_train, config(probe_mode=True))
        assert_unchanged(tiny_model, before)
        assert result.probe_head is not None
        assert "probe_accuracy" in result.metrics

    def test_probe_head_moves(self, tiny_model, small_train):
        from discovery.core.probe import ProbeHead
        from shared.rng import named_generator

        initial = ProbeHead.init(tiny_model.hidden_width, tiny_model.vocab_size,
                                 named_generator(0, "probe-init"))
        result = probe_discover(tiny_model, small_train, config(probe_mode=True))
        assert not np.array_equal(result.probe_head.linear.weight.data, initial.linear.weight.data)

    def test_linear_probing(self, tiny_model, small_train):
        result = probe_discover(tiny_model, small_train,
                                config(probe_mode=True, freeze_masks=True, epochs=30, probe_learning_rate=0.05))
        assert result.subnetwork.kept() == result.subnetwork.total()
        assert result.curve[-1].task_loss < result.curve[0].task_loss
        assert result.curve[-1].l0_value == 0.0

    def test_saved_head_reproduces_accuracy(self, tiny_model, small_train, tmp_path):
        from discovery.core.probe import ProbeHead

        result = probe_discover(tiny_model, small_train, config(probe_mode=True))
        path = result.probe_head.save(tmp_path / "add.probe.npz")
        loaded = ProbeHead.load(path)
        for name, data in result.probe_head.weight_snapshot().items():
            assert np.array_equal(loaded.weight_snapshot()[name], data)
        again = evaluate(tiny_model, result.subnetwork, small_train, EvalMode.SUBNET, loaded)
        assert again.accuracy == result.metrics["probe_accuracy"]

    def test_missing_head_file(self, tmp_path):
        from discovery.core.probe import ProbeHead

        with pytest.raises(ConfigurationError):
            ProbeHead.load(tmp_path / "none.probe.npz")

    def test_requires_probe_mode(self, tiny_model, small_train):
        with pytest.raises(ConfigurationError):
            probe_discover(tiny_model, small_train, config())


@pytest.mark.integration
class TestEvaluate:

    def test_full_equals_all_ones_subnet(self, tiny_model, small_train):
        full = evaluate(tiny_model, None, small_train, EvalMode.FULL)
        subnet = evaluate(tiny_model, all_ones(tiny_model, Granularity.WEIGHT), small_train, "subnet")
        assert (full.accuracy, full.loss) == (subnet.accuracy, subnet.loss)

    def test_neuron_all_ones_subnet(self, tiny_model, small_train):
        full = evaluate(tiny_model, None, small_train)
        subnet = evaluate(tiny_model, all_ones(tiny_model, Granularity.NEURON), small_train, EvalMode.SUBNET)
        assert full.loss == subnet.loss

    def test_task_slice(self, tiny_model, small_train):
        add = filter_task(small_train, TaskName.ADD)
        assert evaluate(tiny_model, None, add).n_examples == len(add)

    def test_modes_need_subnetwork(self, tiny_model, small_train):
        with pytest.raises(ConfigurationError):
            evaluate(tiny_model, None, small_train, EvalMode.COMPLEMENT)

    def test_foreign_subnetwork_rejected(self, tiny_model, tiny_config, small_train):
        from shared.errors import SubnetworkMismatchError

        other = build_transformer(tiny_config, seed=123)
        other.freeze()
        with pytest.raises(SubnetworkMismatchError):
            evaluate(tiny_model, all_ones(other, Granularity.WEIGHT), small_train, EvalMode.SUBNET)


@pytest.mark.integration
class TestLambdaSweep:

    def test_pressure_trend(self, tiny_model, small_train):
        sweep = lambda_sweep(tiny_model, small_train, config(epochs=30, learning_rate=0.2),
                             lambdas=(0.0, 1000.0))
        assert sweep.kept[0] > sweep.kept[1]
        assert sweep.shows_pressure
