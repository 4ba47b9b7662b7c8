import logging
from pathlib import Path

from pydantic import ValidationError

from src.core.exceptions import InputFileNotFound, ParseError
from src.interfaces.repository import IRepository
from src.schemas.model import ModelFile


logger: logging.Logger = logging.getLogger(__name__)


class ModelRepository(IRepository[ModelFile]):
    """Model files as indented JSON documents."""

    def save(self, path: Path, item: ModelFile) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(item.model_dump_json(indent=1), encoding="utf-8")
        logger.info(f"Wrote model file {str(path)!r}")
        return path

    def load(self, path: Path) -> ModelFile:
        """
        Raises:
            InputFileNotFound: If the file is missing
            ParseError: If it is not a model file
        """
        path = Path(path)
        if not self.exists(path):
            raise InputFileNotFound(f"Model file {str(path)!r} does not exist")
        try:
            return ModelFile.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise ParseError(f"{str(path)!r} is not a valid model file", detail=str(exc))
