import numpy as np
import pytest

from src.fusion.costmodel import CostModel
from tests.helpers import synthetic_cost_model


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def cost_model() -> CostModel:
    return synthetic_cost_model()


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv("TILEFUSE_THREADS", raising=False)
    monkeypatch.delenv("TILEFUSE_COST_MODEL", raising=False)
