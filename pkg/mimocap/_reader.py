from enum import Enum
from io import TextIOWrapper
from pathlib import Path
from types import NoneType
from types import UnionType
from typing import Any
from typing import get_args

import msgspec
from typeline import CsvReader
from typing_extensions import Self
from typing_extensions import override

from mimocap._records import ResultType
from mimocap._writer import MISSING_FIELD

COMMENT_PREFIXES: set[str] = {"#"}
"""Lines starting with any of these prefixes are skipped."""


class ResultReader(CsvReader[ResultType]):
    """A reader of result records written by `ResultWriter`."""

    @override
    def __init__(
        self,
        handle: TextIOWrapper,
        record_type: type[ResultType],
        /,
        header: bool = True,
        comment_prefixes: set[str] = COMMENT_PREFIXES,
    ):
        """Instantiate a new result reader.

        Args:
            handle: a file-like object to read delimited data from.
            record_type: the type of result record we will be reading.
            header: whether we expect the first line to be a header or not.
            comment_prefixes: skip lines that have any of these string prefixes.
        """
        super().__init__(handle, record_type, header=header, comment_prefixes=comment_prefixes)

    @override
    def _decode(self, field_type: type[Any] | str | Any, item: str) -> str:
        """A callback for overriding the string formatting of builtin and custom types."""
        type_args: tuple[type, ...] = get_args(field_type)
        is_optional: bool = isinstance(field_type, UnionType) and NoneType in type_args
        if is_optional:
            if item == MISSING_FIELD:
                return "null"
            field_type = next(arg for arg in type_args if arg is not NoneType)

        if field_type is str:
            return msgspec.json.encode(item).decode()
        elif isinstance(field_type, type) and issubclass(field_type, Enum):
            return f'"{item}"'
        elif field_type is bool:
            return item.lower()

        return super()._decode(field_type, item=item)

    @classmethod
    @override
    def from_path(
        cls,
        path: Path | str,
        record_type: type[ResultType],
        /,
        header: bool = True,
        comment_prefixes: set[str] = COMMENT_PREFIXES,
    ) -> Self:
        """Construct a result reader from a file path.

        Args:
            path: the path to the file to read delimited data from.
            record_type: the type of the records we will be reading.
            header: whether we expect the first line to be a header or not.
            comment_prefixes: skip lines that have any of these string prefixes.
        """
        handle = Path(path).open("r")
        reader = cls(handle, record_type, header=header, comment_prefixes=comment_prefixes)
        return reader
