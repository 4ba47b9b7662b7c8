from typing import TypeVar


ItemType = TypeVar("ItemType")
