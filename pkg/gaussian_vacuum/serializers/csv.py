import csv
import io
from typing import Any, Mapping, Sequence

from django.core.exceptions import ImproperlyConfigured

from .base import BaseSerializer


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(getattr(value, "value", value))


class CSVSerializer(BaseSerializer):
    """Writes ``{"columns": [...], "rows": [[...], ...]}`` tables."""

    def dumps(self, value: Any) -> bytes:
        if hasattr(value, "table"):
            value = value.table()
        if not (
            isinstance(value, Mapping) and "columns" in value and "rows" in value
        ):
            raise ImproperlyConfigured(
                "the csv format needs a table with 'columns' and 'rows'"
            )
        columns: Sequence[str] = value["columns"]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in value["rows"]:
            if len(row) != len(columns):
                raise ValueError(f"row {row!r} does not match columns {columns!r}")
            writer.writerow([_cell(v) for v in row])
        return buffer.getvalue().encode()

    def loads(self, value: bytes) -> Any:
        reader = csv.reader(io.StringIO(value.decode()))
        columns, *rows = list(reader)
        return {"columns": columns, "rows": rows}
