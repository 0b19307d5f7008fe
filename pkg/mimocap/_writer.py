import math
from enum import Enum
from typing import Any

from typeline import CsvWriter
from typing_extensions import override

from mimocap._records import ResultType

MISSING_FIELD: str = ""
"""The text written for a missing value."""


class ResultWriter(CsvWriter[ResultType]):
    """A writer of result records as comma-separated text with a header."""

    @override
    def _encode(self, item: Any) -> Any:
        """A callback for overriding the encoding of builtin types and custom types."""
        if item is None:
            return MISSING_FIELD
        elif isinstance(item, bool):
            return "true" if item else "false"
        elif isinstance(item, Enum):
            return str(item.value)
        elif isinstance(item, float) and not math.isfinite(item):
            return "nan" if math.isnan(item) else ("inf" if item > 0 else "-inf")
        elif isinstance(item, float):
            return repr(item)
        return super()._encode(item=item)
