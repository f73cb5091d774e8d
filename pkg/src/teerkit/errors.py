"""Exception types shared across the toolkit."""

from __future__ import annotations


class DataError(ValueError):
    """Input data violates a documented contract (bad values, mismatched ids)."""


class ParseError(DataError):
    """A line of an interchange file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
