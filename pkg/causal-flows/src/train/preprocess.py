import logging
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.enums import VariableKind
from src.core.exceptions import ConfigError, DegenerateColumn
from src.schemas.train import PreprocessInfo
from src.train.dataset import Dataset


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

DEQUANTIZATION_SD = 1.0 / 6.0


def dequantize(column: ArrayLike, seed: int, column_index: int = 0) -> Array:
    """Add N(0, 1/36) noise; the draw for each cell depends only on (seed, column, row)."""
    column = np.asarray(column, dtype=np.float64)
    rng = np.random.default_rng([seed, column_index])
    return column + rng.normal(0.0, DEQUANTIZATION_SD, size=column.shape[0])


def requantize(column: ArrayLike, support: Sequence[int]) -> Array:
    """Round to the nearest integer, then snap to the nearest support level."""
    levels = np.asarray(support, dtype=np.float64)
    rounded = np.rint(np.asarray(column, dtype=np.float64))
    nearest = np.abs(rounded[..., None] - levels).argmin(axis=-1)
    return levels[nearest]


def dequantize_dataset(dataset: Dataset, seed: int) -> Tuple[Array, Tuple[bool, ...]]:
    values = dataset.values.copy()
    flags = []
    for i, spec in enumerate(dataset.specs):
        discrete = spec.kind is VariableKind.DISCRETE
        if discrete:
            values[:, i] = dequantize(values[:, i], seed, i)
        flags.append(discrete)
    return values, tuple(flags)


def standardize(
    dataset: Dataset, dequantized: Sequence[bool] | None = None
) -> Tuple[Dataset, PreprocessInfo]:
    """
    Z-score every column by its own mean and SD.

    Raises:
        DegenerateColumn: If a column has zero standard deviation
    """
    means = dataset.values.mean(axis=0)
    sds = dataset.values.std(axis=0)
    for name, sd in zip(dataset.columns, sds):
        if not sd > 0:
            raise DegenerateColumn(f"Column {name!r} has zero standard deviation")
    flags = tuple(dequantized) if dequantized is not None else (False,) * len(dataset.columns)
    info = PreprocessInfo(
        columns=dataset.columns,
        means=tuple(float(m) for m in means),
        sds=tuple(float(s) for s in sds),
        dequantized=flags,
        supports={
            s.name: s.support
            for s in dataset.specs
            if s.kind is VariableKind.DISCRETE and s.support
        },
    )
    scaled = Dataset(
        columns=dataset.columns, values=info.standardize(dataset.values), specs=dataset.specs
    )
    return scaled, info


def destandardize(values: ArrayLike, info: PreprocessInfo) -> Array:
    return info.destandardize(np.asarray(values, dtype=np.float64))


def prepare(dataset: Dataset, seed: int) -> Tuple[Array, PreprocessInfo]:
    """Dequantize discrete columns, then standardize all of them."""
    values, flags = dequantize_dataset(dataset, seed)
    dequantized = Dataset(columns=dataset.columns, values=values, specs=dataset.specs)
    scaled, info = standardize(dequantized, flags)
    logger.debug(f"Prepared {dataset.n} rows, {sum(flags)} dequantized column(s)")
    return scaled.values, info


def split(
    n: int, validation_fraction: float, seed: int
) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
    """
    Disjoint (train, validation) row indices after a seeded shuffle.
    Both parts hold at least one row.

    Raises:
        ConfigError: If fewer than two rows are available
    """
    if n < 2:
        raise ConfigError(
            f"Need at least two rows to split into training and validation, got {n}",
            detail=f"rows={n}",
        )
    n_valid = min(max(int(round(n * validation_fraction)), 1), n - 1)
    order = np.random.default_rng([seed, 0xA11, 1]).permutation(n)
    return np.sort(order[n_valid:]), np.sort(order[:n_valid])
