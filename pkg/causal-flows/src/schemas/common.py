from typing import Any, Dict, Generic, Optional, TypeVar

from pydantic import BaseModel


T = TypeVar("T")


class IRecordBase(BaseModel, Generic[T]):  # type: ignore
    message: str = ""
    meta: Optional[Dict[str, Any]] = {}
    data: Optional[T] = None
    status: bool = True


class IResultRecord(IRecordBase[T], Generic[T]):
    message: str = "Estimate computed"
    data: Optional[T] = None


class IErrorRecord(IRecordBase[Dict[str, Any]]):
    message: str = "Command failed"
    status: bool = False
