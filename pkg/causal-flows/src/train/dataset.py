import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from src.core.config import settings
from src.core.enums import VariableKind
from src.core.exceptions import (
    InputFileNotFound,
    MissingColumn,
    NonNumericCell,
    ParseError,
    ShapeMismatch,
)
from src.graph.dag import Dag
from src.schemas.graph import VariableSpec


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]


@dataclass
class Dataset:
    """
    Tabular data on the data scale.

    Attributes:
        columns: Column names
        values: n x k matrix
        specs: One VariableSpec per column
    """

    columns: Tuple[str, ...]
    values: Array
    specs: Tuple[VariableSpec, ...]

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ShapeMismatch(
                f"Data matrix {self.values.shape} does not match {len(self.columns)} columns"
            )
        if len(self.specs) != len(self.columns):
            raise ShapeMismatch("One VariableSpec per column is required")
        if not np.all(np.isfinite(self.values)):
            raise NonNumericCell("Dataset contains non-finite cells")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> Array:
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise MissingColumn(f"Column {name!r} is not in the dataset")

    def take(self, rows: NDArray[np.int64]) -> "Dataset":
        return Dataset(columns=self.columns, values=self.values[rows], specs=self.specs)

    def align(self, dag: Dag) -> "Dataset":
        """Reorder the columns to the DAG's declaration order."""
        missing = [name for name in dag.names if name not in self.columns]
        if missing:
            raise MissingColumn(
                f"Data lacks DAG variable(s): {', '.join(missing)}", detail=",".join(missing)
            )
        extra = [c for c in self.columns if c not in dag.names]
        if extra:
            logger.warning(f"Ignoring columns not in the DAG: {', '.join(extra)}")
        order = [self.columns.index(name) for name in dag.names]
        return Dataset(
            columns=tuple(dag.names),
            values=self.values[:, order],
            specs=tuple(self.specs[i] for i in order),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=list(self.columns))


def infer_spec(
    name: str, column: Array, max_levels: Optional[int] = None
) -> VariableSpec:
    """Integer-valued columns with at most ``max_levels`` distinct values are discrete."""
    max_levels = max_levels or settings.DISCRETE_MAX_LEVELS
    levels = np.unique(column)
    if np.all(levels == np.round(levels)) and len(levels) <= max_levels:
        return VariableSpec(
            name=name,
            kind=VariableKind.DISCRETE,
            support=tuple(int(x) for x in levels),
        )
    return VariableSpec(name=name, kind=VariableKind.CONTINUOUS)


def from_matrix(
    columns: Sequence[str],
    values: Array,
    overrides: Optional[Mapping[str, VariableSpec]] = None,
) -> Dataset:
    overrides = overrides or {}
    values = np.asarray(values, dtype=np.float64)
    specs = []
    for i, name in enumerate(columns):
        declared = overrides.get(name)
        if declared is not None and (
            declared.kind is VariableKind.CONTINUOUS or declared.support is not None
        ):
            specs.append(declared)
        elif declared is not None:
            observed = np.unique(np.round(values[:, i]))
            specs.append(declared.model_copy(update={"support": tuple(int(x) for x in observed)}))
        else:
            specs.append(infer_spec(name, values[:, i]))
    return Dataset(columns=tuple(columns), values=values, specs=tuple(specs))


def load_csv(
    path: Path,
    dag: Optional[Dag] = None,
    overrides: Optional[Dict[str, VariableSpec]] = None,
) -> Dataset:
    """
    Read a numeric CSV with a header row; ``#`` lines are ignored.

    Variable kinds are inferred unless the DAG or ``overrides`` declare them.
    With a DAG the result is aligned to its declaration order.

    Raises:
        InputFileNotFound, ParseError, NonNumericCell, MissingColumn
    """
    path = Path(path)
    if not path.exists():
        raise InputFileNotFound(f"Data file {str(path)!r} does not exist")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, comment="#")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ParseError(f"Cannot parse {path.name}: {exc}")
    frame.columns = [str(c).strip() for c in frame.columns]

    numeric = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    values = numeric.to_numpy(dtype=np.float64, na_value=np.nan)
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        raise NonNumericCell(
            f"Row {row + 1}, column {frame.columns[col]!r}: {frame.iat[row, col]!r} is not numeric",
            detail=f"row={row + 1},column={frame.columns[col]}",
        )

    declared: Dict[str, VariableSpec] = {}
    if dag is not None:
        declared.update(
            {v.name: v for v in dag.variables if v.kind is VariableKind.DISCRETE}
        )
    declared.update(overrides or {})
    dataset = from_matrix(list(frame.columns), values, declared)
    logger.info(f"Loaded {dataset.n} rows x {len(dataset.columns)} columns from {path.name}")
    return dataset.align(dag) if dag is not None else dataset
