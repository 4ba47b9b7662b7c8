import io
import logging
import re
from pathlib import Path
from typing import Dict, List

import pandas as pd

from src.core.enums import DagFormat
from src.core.exceptions import DuplicateVariable, InputFileNotFound, MalformedLine
from src.graph.dag import Dag


logger: logging.Logger = logging.getLogger(__name__)

_NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
_EDGE = re.compile(rf"^({_NAME})\s*->\s*({_NAME})$")
_DECLARATION = re.compile(rf"^({_NAME})$")


def parse_dag(text: str, format: DagFormat = DagFormat.EDGE_LIST) -> Dag:
    """
    Parse a DAG description.

    EdgeList: one ``A -> B`` statement per line (several may be separated by
    commas), a bare name declares a variable, ``#`` starts a comment.
    AdjacencyMatrix: CSV whose first row and first column hold the variable
    names; a cell equal to 1 makes the row variable a parent of the column
    variable.

    Raises:
        CycleDetected, UnknownVariable, DuplicateVariable, MalformedLine
    """
    if format is DagFormat.ADJACENCY_MATRIX:
        return _parse_adjacency(text)
    return _parse_edge_list(text)


def load_dag(path: Path, format: DagFormat = DagFormat.EDGE_LIST) -> Dag:
    path = Path(path)
    if not path.exists():
        raise InputFileNotFound(f"DAG file {str(path)!r} does not exist")
    return parse_dag(path.read_text(encoding="utf-8"), format)


def _parse_edge_list(text: str) -> Dag:
    names: List[str] = []
    parents: Dict[str, set[str]] = {}

    def declare(name: str) -> None:
        if name not in parents:
            names.append(name)
            parents[name] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for statement in line.split(","):
            statement = statement.strip()
            if not statement:
                continue
            edge = _EDGE.match(statement)
            if edge:
                parent, child = edge.groups()
                declare(parent)
                declare(child)
                parents[child].add(parent)
            elif _DECLARATION.match(statement):
                declare(statement)
            else:
                raise MalformedLine(
                    f"Line {lineno}: cannot parse {statement!r}", detail=f"line={lineno}"
                )
    logger.debug(f"Parsed edge list with {len(names)} variables")
    return Dag.build(names, parents)


def _parse_adjacency(text: str) -> Dag:
    try:
        frame = pd.read_csv(
            io.StringIO(text), header=None, dtype=str, comment="#", skipinitialspace=True
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise MalformedLine(f"Line 1: unreadable adjacency matrix ({exc})", detail="line=1")

    if frame.shape[0] < 2 or frame.shape[1] < 2:
        raise MalformedLine(
            "Line 1: adjacency matrix needs a header row and a name column", detail="line=1"
        )
    columns = [str(c).strip() for c in frame.iloc[0, 1:]]
    rows = [str(r).strip() for r in frame.iloc[1:, 0]]
    cells = frame.iloc[1:, 1:]
    for label, seq in (("header", columns), ("first column", rows)):
        dupes = sorted({n for n in seq if seq.count(n) > 1})
        if dupes:
            raise DuplicateVariable(f"Duplicate variable(s) in {label}: {', '.join(dupes)}")
    if rows != columns:
        raise MalformedLine(
            "Line 1: header names must match the first-column names in the same order",
            detail="line=1",
        )
    for name in columns:
        if not re.fullmatch(_NAME, name):
            raise MalformedLine(f"Line 1: invalid variable name {name!r}", detail="line=1")

    parents: Dict[str, set[str]] = {name: set() for name in columns}
    for i, row_name in enumerate(rows):
        lineno = i + 2
        for j, col_name in enumerate(columns):
            cell = cells.iat[i, j]
            value = "" if pd.isna(cell) else str(cell).strip()
            if value in ("", "0", "0.0"):
                continue
            if value in ("1", "1.0"):
                parents[col_name].add(row_name)
                continue
            raise MalformedLine(
                f"Line {lineno}: cell ({row_name}, {col_name}) must be 0 or 1, got {value!r}",
                detail=f"line={lineno}",
            )
    return Dag.build(columns, parents)
