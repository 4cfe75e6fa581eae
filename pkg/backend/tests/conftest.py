"""
Shared fixtures: tiny models and datasets small enough for unit tests.
"""

import numpy as np
import pytest

from arithmetic_tasks.core.generator import generate
from model_core.core.mlp import build_mlp
from model_core.core.transformer import build_transformer
from model_core.models.data_models import MLPConfig, TransformerConfig

SMALL_MODULUS = 5


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="Run performance tests (full experiment reproduction)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "performance" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def tiny_config():
    return TransformerConfig(n_layers=2, d_model=8, n_heads=2, d_mlp=16,
                             vocab_size=SMALL_MODULUS + 4, max_seq_len=5)


@pytest.fixture
def tiny_model(tiny_config):
    model = build_transformer(tiny_config, seed=7)
    model.freeze()
    return model


@pytest.fixture
def tiny_mlp():
    model = build_mlp(MLPConfig(vocab_size=SMALL_MODULUS + 4, seq_len=5, d_embed=4, hidden_sizes=[8, 6]), seed=3)
    model.freeze()
    return model


@pytest.fixture
def small_split():
    return generate(SMALL_MODULUS, seed=11, split_fraction=0.8)


@pytest.fixture
def small_train(small_split):
    return small_split[0]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
