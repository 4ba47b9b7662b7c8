import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from src.core.exceptions import InputFileNotFound
from src.interfaces.repository import IRepository


logger: logging.Logger = logging.getLogger(__name__)


class CsvRepository(IRepository[pd.DataFrame]):
    """
    CSV tables led by ``#`` comment lines that echo the producing run.

    ``load_csv`` and ``load`` both skip the comment lines, so written tables
    read back as plain data.
    """

    def __init__(self, header: Optional[Dict[str, Any]] = None, float_format: str = "%.10g"):
        self.header = header or {}
        self.float_format = float_format

    def save(self, path: Path, item: pd.DataFrame) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            for key, value in self.header.items():
                f.write(f"# {key}: {json.dumps(value, sort_keys=True, default=str)}\n")
            item.to_csv(f, index=False, float_format=self.float_format, lineterminator="\n")
        logger.debug(f"Wrote {len(item)} row(s) to {str(path)!r}")
        return path

    def load(self, path: Path) -> pd.DataFrame:
        path = Path(path)
        if not self.exists(path):
            raise InputFileNotFound(f"Table {str(path)!r} does not exist")
        return pd.read_csv(path, comment="#")
