"""
Tests for the Adam optimizer.
"""

import numpy as np
import pytest

from shared.errors import ConfigurationError, MissingGradientError
from tensor_engine import Adam, AdamState, Tensor, adam_step


@pytest.mark.unit
class TestAdamStep:

    def test_zero_gradient_leaves_parameter(self):
        x = Tensor([1.5, -2.0], requires_grad=True, name="x")
        x.grad = np.zeros(2)
        adam_step([x], AdamState(), lr=0.1)
        assert x.data.tolist() == [1.5, -2.0]

    def test_first_step_moves_by_lr_times_sign(self):
        x = Tensor(1.0, requires_grad=True, name="x")
        x.grad = np.array(3.0)
        adam_step([x], AdamState(), lr=0.01)
        assert abs(x.item() - (1.0 - 0.01)) < 1e-8

    def test_state_advances(self):
        x = Tensor(0.0, requires_grad=True, name="x")
        state = AdamState()
        for _ in range(3):
            x.grad = np.array(1.0)
            adam_step([x], state)
        assert state.step == 3
        assert "x" in state.first_moments

    def test_missing_gradient_lists_names(self):
        a = Tensor(0.0, requires_grad=True, name="a")
        b = Tensor(0.0, requires_grad=True, name="b")
        a.grad = np.array(1.0)
        with pytest.raises(MissingGradientError) as err:
            adam_step([a, b], AdamState())
        assert err.value.names == ["b"]

    def test_duplicate_names_rejected(self):
        with pytest.raises(ConfigurationError):
            Adam([Tensor(0.0, name="w"), Tensor(1.0, name="w")])


@pytest.mark.unit
class TestAdamConvergence:

    def test_quadratic_decreases_monotonically(self):
        x = Tensor(0.0, requires_grad=True, name="x")
        optimizer = Adam([x], lr=0.1)
        losses = []
        for _ in range(10):
            optimizer.zero_grad()
            loss = (x - 2.0) * (x - 2.0)
            losses.append(loss.item())
            loss.backward()
            optimizer.step()
        assert all(later < earlier for earlier, later in zip(losses, losses[1:]))
