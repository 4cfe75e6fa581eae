"""
Tests for the tensor engine: primitives, the tape and gradient correctness.
"""

import math

import numpy as np
import pytest

from shared.errors import BroadcastError, DimensionError, DomainError, NonScalarError, TokenRangeError
from tensor_engine import Tape, Tensor
from tensor_engine.core import functional as F
from masking.config.mask_config import MaskConfig
from masking.core.masked_layer import MaskedLayer, masked_forward
from masking.core.strategies import AnnealState
from model_core.core.layers import Linear


def numeric_grad(fn, tensor, step=1e-5):
    """Central finite differences of scalar fn() with respect to tensor."""
    base = tensor.data.copy()
    grad = np.zeros_like(base)
    for index in np.ndindex(base.shape):
        plus, minus = base.copy(), base.copy()
        plus[index] += step
        minus[index] -= step
        tensor.assign(plus)
        f_plus = fn().item()
        tensor.assign(minus)
        f_minus = fn().item()
        grad[index] = (f_plus - f_minus) / (2 * step)
    tensor.assign(base)
    return grad


def relative_error(a, b):
    return np.max(np.abs(a - b) / np.maximum(1e-8, np.abs(a) + np.abs(b)))


@pytest.mark.unit
class TestTensorValue:

    def test_data_is_read_only(self):
        t = Tensor([1.0, 2.0])
        with pytest.raises(ValueError):
            t.data[0] = 5.0

    def test_assign_rebinds_buffer(self):
        t = Tensor([1.0, 2.0])
        old = t.data
        t.assign([3.0, 4.0])
        assert t.data is not old
        assert old.tolist() == [1.0, 2.0]
        assert t.data.tolist() == [3.0, 4.0]

    def test_assign_shape_change_rejected(self):
        with pytest.raises(DimensionError):
            Tensor([1.0, 2.0]).assign([1.0])

    def test_dtype_is_float64(self):
        assert Tensor([1, 2, 3]).data.dtype == np.float64

    def test_constant_ops_stay_off_tape(self):
        out = Tensor([1.0]) + Tensor([2.0])
        assert not out.requires_grad
        assert out.parents == ()


@pytest.mark.unit
class TestMatmul:

    def test_identity(self):
        m = Tensor([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(F.matmul(Tensor(np.eye(2)), m).data, m.data)

    def test_projector(self):
        out = F.matmul(Tensor([[1.0, 0.0], [0.0, 0.0]]), Tensor([[5.0, 6.0], [7.0, 8.0]]))
        assert out.data.tolist() == [[5.0, 6.0], [0.0, 0.0]]

    def test_matches_triple_loop(self, rng):
        a, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
        expected = np.zeros((3, 2))
        for i in range(3):
            for j in range(2):
                for k in range(4):
                    expected[i, j] += a[i, k] * b[k, j]
        assert np.max(np.abs(F.matmul(Tensor(a), Tensor(b)).data - expected)) < 1e-12

    def test_inner_dimension_mismatch(self):
        with pytest.raises(DimensionError) as err:
            F.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
        assert "(2, 3)" in str(err.value)

    def test_batched_left_with_matrix_right(self, rng):
        a = Tensor(rng.normal(size=(2, 3, 4)), requires_grad=True)
        b = Tensor(rng.normal(size=(4, 5)), requires_grad=True)
        out = F.matmul(a, b)
        assert out.shape == (2, 3, 5)
        fn = lambda: F.matmul(a, b).sum()  # noqa: E731
        fn().backward()
        assert relative_error(b.grad, numeric_grad(fn, b)) < 1e-6


@pytest.mark.unit
class TestElementwise:

    def test_sigmoid_zero(self):
        assert F.elementwise("sigmoid", Tensor(0.0)).item() == 0.5

    def test_sigmoid_value(self):
        assert abs(F.sigmoid(Tensor(1.5986)).item() - 0.8318) < 1e-4

    def test_clamp_saturated_gradient_is_zero(self):
        x = Tensor(1.3, requires_grad=True)
        out = F.elementwise("clamp", x, 0.0, 1.0)
        assert out.item() == 1.0
        out.backward()
        assert x.grad == 0.0

    def test_scalar_broadcast(self):
        out = Tensor([1.0, 2.0]) * 3.0
        assert out.data.tolist() == [3.0, 6.0]

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(BroadcastError):
            Tensor(np.ones((2, 3))) + Tensor(np.ones(3))

    def test_explicit_broadcast_gradient_sums(self):
        x = Tensor(np.ones(3), requires_grad=True)
        F.broadcast_to(x, (4, 3)).sum().backward()
        assert x.grad.tolist() == [4.0, 4.0, 4.0]

    def test_log_of_non_positive(self):
        with pytest.raises(DomainError):
            F.log(Tensor([1.0, 0.0]))

    def test_unknown_op(self):
        with pytest.raises(ValueError):
            F.elementwise("cosh", Tensor(1.0))

    @pytest.mark.parametrize("op", ["sigmoid", "relu", "tanh", "exp", "gelu"])
    def test_unary_gradients(self, op, rng):
        x = Tensor(rng.normal(size=(3, 2)) + 0.05, requires_grad=True)
        fn = lambda: F.elementwise(op, x).sum()  # noqa: E731
        fn().backward()
        assert relative_error(x.grad, numeric_grad(fn, x)) < 1e-6


@pytest.mark.unit
class TestSoftmaxCrossEntropy:

    def test_uniform_logits(self):
        loss = F.softmax_cross_entropy(Tensor(np.zeros((3, 7))), np.array([0, 3, 6]))
        assert abs(loss.item() - math.log(7)) < 1e-12

    def test_confident_correct(self):
        loss = F.softmax_cross_entropy(Tensor([[10.0, -10.0]]), np.array([0]))
        assert loss.item() < 1e-8

    def test_gradient_matches_finite_differences(self, rng):
        logits = Tensor(rng.normal(size=(4, 7)), requires_grad=True)
        targets = np.array([1, 0, 6, 3])
        fn = lambda: F.softmax_cross_entropy(logits, targets)  # noqa: E731
        fn().backward()
        assert relative_error(logits.grad, numeric_grad(fn, logits)) < 1e-6

    def test_target_out_of_range(self):
        with pytest.raises(TokenRangeError):
            F.softmax_cross_entropy(Tensor(np.zeros((1, 3))), np.array([3]))


@pytest.mark.unit
class TestBackward:

    def test_square(self):
        x = Tensor(3.0, requires_grad=True)
        (x * x).backward()
        assert x.grad == 6.0

    def test_reuse_accumulates(self):
        w = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
        x = Tensor(np.array([[1.0], [1.0]]), requires_grad=True)
        single = Tensor(x.data, requires_grad=True)
        F.matmul(w, single).sum().backward()
        (F.matmul(w, x).sum() + F.matmul(w, x).sum()).backward()
        assert np.array_equal(x.grad, 2 * single.grad)

    def test_non_scalar_rejected(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(NonScalarError):
            (x * 2.0).backward()

    def test_off_tape_rejected(self):
        with pytest.raises(NonScalarError):
            Tensor(1.0).backward()

    def test_tape_is_topologically_ordered(self):
        x = Tensor(2.0, requires_grad=True)
        loss = F.sigmoid(x * x) + x
        tape = Tape.record(loss)
        ops = [entry.op for entry in tape.entries]
        assert ops.index("mul") < ops.index("sigmoid") < ops.index("add")

    def test_two_layer_mlp_gradients(self, rng):
        w1 = Tensor(rng.normal(size=(5, 3)), requires_grad=True)
        b1 = Tensor(rng.normal(size=5), requires_grad=True)
        w2 = Tensor(rng.normal(size=(4, 5)), requires_grad=True)
        x = Tensor(rng.normal(size=(6, 3)))
        targets = np.array([0, 1, 2, 3, 0, 1])

        def loss():
            return F.softmax_cross_entropy(F.linear(F.tanh(F.linear(x, w1, b1)), w2), targets)

        loss().backward()
        for param in (w1, b1, w2):
            assert relative_error(param.grad, numeric_grad(loss, param)) < 1e-4


@pytest.mark.unit
class TestShapeOps:

    def test_layer_norm_statistics(self, rng):
        x = Tensor(rng.normal(size=(2, 3, 8)) * 5 + 2)
        out = F.layer_norm(x, Tensor(np.ones(8)), Tensor(np.zeros(8)))
        assert np.allclose(out.data.mean(axis=-1), 0.0, atol=1e-12)
        assert np.allclose(out.data.var(axis=-1), 1.0, atol=1e-8)

    def test_layer_norm_gradients(self, rng):
        x = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
        gamma = Tensor(rng.normal(size=4), requires_grad=True)
        beta = Tensor(rng.normal(size=4), requires_grad=True)
        weights = Tensor(rng.normal(size=(2, 4)))
        fn = lambda: (F.layer_norm(x, gamma, beta) * weights).sum()  # noqa: E731
        fn().backward()
        for param in (x, gamma, beta):
            assert relative_error(param.grad, numeric_grad(fn, param)) < 1e-4

    def test_softmax_and_masked_fill_gradients(self, rng):
        x = Tensor(rng.normal(size=(3, 3)), requires_grad=True)
        mask = np.triu(np.ones((3, 3), dtype=bool), k=1)
        weights = Tensor(rng.normal(size=(3, 3)))
        fn = lambda: (F.softmax(F.masked_fill(x, mask, -1e9)) * weights).sum()  # noqa: E731
        fn().backward()
        assert relative_error(x.grad, numeric_grad(fn, x)) < 1e-4
        assert np.all(x.grad[mask] == 0.0)

    def test_take_rows_accumulates_repeated_indices(self):
        table = Tensor(np.arange(6.0).reshape(3, 2), requires_grad=True)
        F.take_rows(table, np.array([0, 2, 0])).sum().backward()
        assert table.grad.tolist() == [[2.0, 2.0], [0.0, 0.0], [1.0, 1.0]]

    def test_take_rows_out_of_range(self):
        with pytest.raises(TokenRangeError):
            F.take_rows(Tensor(np.zeros((3, 2))), np.array([3]))

    def test_select_positions(self):
        x = Tensor(np.arange(12.0).reshape(2, 3, 2))
        out = F.select_positions(x, np.array([2, 0]))
        assert out.data.tolist() == [[4.0, 5.0], [6.0, 7.0]]

    def test_reshape_count_mismatch(self):
        with pytest.raises(DimensionError):
            F.reshape(Tensor(np.ones(6)), (4, 2))


@pytest.mark.unit
class TestModelGradients:

    def test_causal_attention_gradients(self, tiny_model, small_train):
        rng = np.random.default_rng(5)
        tiny_model.unfreeze()
        params = tiny_model.named_parameters()
        attention = [params[f"layer{i}.attn.{part}.weight"] for i in (0, 1) for part in "qkvo"]
        for tensor in attention:
            tensor.assign(rng.normal(scale=0.5, size=tensor.shape))

        rows = np.arange(6)
        tokens, positions = small_train.tokens[rows], small_train.answer_positions[rows]

        def loss():
            logits = tiny_model.answer_logits(tokens, positions)
            return F.softmax_cross_entropy(logits, small_train.answers[rows])

        loss().backward()
        for tensor in attention:
            assert np.allclose(tensor.grad, numeric_grad(loss, tensor), rtol=1e-4, atol=1e-8), tensor.name

    @pytest.mark.parametrize("strategy", ["hard_concrete", "continuous_sparsification"])
    def test_soft_mask_gradients(self, strategy, rng):
        base = Linear("layer0.mlp.fc", Tensor(rng.normal(size=(3, 4))), Tensor(rng.normal(size=3)))
        layer = MaskedLayer(base, MaskConfig(strategy=strategy))
        layer.mask_params.assign(rng.normal(size=(3, 4)))
        anneal = AnnealState(beta_final=200.0, total_steps=10, step=3)
        x = Tensor(rng.normal(size=(5, 4)))
        weights = Tensor(rng.normal(size=(5, 3)))

        def loss():
            # same noise on every call
            out = masked_forward(layer, x, anneal=anneal, rng=np.random.default_rng(9))
            return (out * weights).sum()

        loss().backward()
        assert np.allclose(layer.mask_params.grad, numeric_grad(loss, layer.mask_params), rtol=1e-4, atol=1e-8)
        assert base.weight.grad is None
