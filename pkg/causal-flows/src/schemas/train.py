import logging
from typing import Dict, List, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.config import settings
from src.core.enums import OptimizerKind, StopReason


logger: logging.Logger = logging.getLogger(__name__)


class ArchitectureConfig(BaseModel):
    """Shared layout of every normalizer in a flow."""

    model_config = ConfigDict(frozen=True)

    embedding_hidden: Tuple[int, ...] = (100, 90, 80, 70, 60)
    integrand_hidden: Tuple[int, ...] = (60, 50, 40, 30, 20)
    embedding_width: int = Field(default_factory=lambda: settings.EMBEDDING_WIDTH, ge=1)
    quadrature_nodes: int = Field(default_factory=lambda: settings.QUADRATURE_NODES, ge=1)

    def embedding_sizes(self, n_parents: int) -> Tuple[int, ...]:
        return (n_parents, *self.embedding_hidden, self.embedding_width)

    def integrand_sizes(self) -> Tuple[int, ...]:
        return (self.embedding_width + 1, *self.integrand_hidden, 1)

    def without_last_layer(self) -> "ArchitectureConfig":
        return self.model_copy(
            update={
                "embedding_hidden": self.embedding_hidden[:-1],
                "integrand_hidden": self.integrand_hidden[:-1],
            }
        )

    def scaled_nodes(self, factor: float) -> "ArchitectureConfig":
        def scale(sizes: Tuple[int, ...]) -> Tuple[int, ...]:
            return tuple(max(1, int(round(s * factor))) for s in sizes)

        return self.model_copy(
            update={
                "embedding_hidden": scale(self.embedding_hidden),
                "integrand_hidden": scale(self.integrand_hidden),
            }
        )


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    batch_size: int = Field(default=128, ge=1)
    learning_rate: float = Field(default=1e-4, gt=0)
    patience_epochs: int = Field(default=50, ge=1)
    validation_fraction: float = Field(default=0.2, gt=0, lt=1)
    max_epochs: int = Field(default=50_000, ge=1)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    optimizer: OptimizerKind = OptimizerKind.ADAM

    @model_validator(mode="after")
    def warn_outside_recommendations(self) -> "TrainConfig":
        if not 64 <= self.batch_size <= 512:
            logger.warning(
                f"Batch size {self.batch_size} is outside the recommended range 64..512"
            )
        if self.learning_rate > 0.001:
            logger.warning(f"Learning rate {self.learning_rate} exceeds the recommended 0.001")
        return self


class PreprocessInfo(BaseModel):
    """Per-column constants needed to move between data and model scale."""

    columns: Tuple[str, ...]
    means: Tuple[float, ...]
    sds: Tuple[float, ...]
    dequantized: Tuple[bool, ...]
    supports: Dict[str, Tuple[int, ...]] = Field(default_factory=dict)

    def standardize(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        return (values - np.asarray(self.means)) / np.asarray(self.sds)

    def destandardize(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        return values * np.asarray(self.sds) + np.asarray(self.means)

    def standardize_value(self, name: str, value: float) -> float:
        i = self.columns.index(name)
        return (value - self.means[i]) / self.sds[i]


class TrainHistory(BaseModel):
    train_loss: List[float] = Field(default_factory=list)
    valid_loss: List[float] = Field(default_factory=list)
    best_epoch: int = -1
    stop_reason: StopReason = StopReason.MAX_EPOCHS

    @property
    def best_valid_loss(self) -> float:
        return self.valid_loss[self.best_epoch]

    @model_validator(mode="after")
    def check_best(self) -> "TrainHistory":
        if self.valid_loss and self.valid_loss[self.best_epoch] != min(self.valid_loss):
            raise ValueError("best_epoch must point at the minimum validation loss")
        return self
