from typing import Callable, List

import numpy as np
import pytest

from src.flow.cgnf import Cgnf, build_cgnf, identity_cgnf
from src.graph.dag import Dag
from src.graph.parser import parse_dag
from src.schemas.train import ArchitectureConfig, TrainConfig
from src.train.dataset import Dataset, from_matrix


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run acceptance-scale tests"
    )


def pytest_collection_modifyitems(config: pytest.Config, items: List[pytest.Item]) -> None:
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def tiny_architecture() -> ArchitectureConfig:
    """Small enough for finite differences and second-scale fits."""
    return ArchitectureConfig(
        embedding_hidden=(6, 5), integrand_hidden=(6, 5), embedding_width=3, quadrature_nodes=12
    )


@pytest.fixture
def chain_dag() -> Dag:
    return parse_dag("X -> Y")


@pytest.fixture
def mediation_dag() -> Dag:
    return parse_dag("C -> A, C -> M, C -> Y\nA -> M, A -> Y\nM -> Y")


@pytest.fixture
def toy_flow(chain_dag: Dag, tiny_architecture: ArchitectureConfig) -> Cgnf:
    return build_cgnf(chain_dag, tiny_architecture, seed=7)


@pytest.fixture
def identity_flow(mediation_dag: Dag, tiny_architecture: ArchitectureConfig) -> Cgnf:
    return identity_cgnf(mediation_dag, tiny_architecture)


@pytest.fixture
def quick_train_config() -> TrainConfig:
    return TrainConfig(batch_size=64, learning_rate=1e-3, patience_epochs=3, max_epochs=8, seed=11)


@pytest.fixture
def linear_chain_data() -> Dataset:
    """X ~ N(0, 1), Y = 0.5 X + N(0, 1), 400 rows."""
    rng = np.random.default_rng(3)
    x = rng.standard_normal(400)
    y = 0.5 * x + rng.standard_normal(400)
    return from_matrix(["X", "Y"], np.column_stack([x, y]))


@pytest.fixture
def write_text(tmp_path) -> Callable[[str, str], str]:
    def _write(name: str, content: str) -> str:
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return str(path)

    return _write
