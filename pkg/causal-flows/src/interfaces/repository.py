from abc import ABCMeta, abstractmethod
from pathlib import Path
from typing import Generic

from src.repositories.types import ItemType


class IRepository(Generic[ItemType], metaclass=ABCMeta):
    """Class representing the file-backed repository interface."""

    @abstractmethod
    def save(self, path: Path, item: ItemType) -> Path:
        """Write an item and return the path written."""
        raise NotImplementedError

    @abstractmethod
    def load(self, path: Path) -> ItemType:
        """Read an item back."""
        raise NotImplementedError

    def exists(self, path: Path) -> bool:
        return Path(path).exists()
