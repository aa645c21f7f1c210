"""Append-only CSV metrics, flushed per row."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable


class MetricsWriter:
    def __init__(self, path, columns: Iterable[str]):
        self.path = Path(path)
        self.columns = tuple(columns)
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(self.columns)
        self._fh.flush()
        self.rows_written = 0

    def write_row(self, values: dict) -> None:
        unknown = set(values) - set(self.columns)
        if unknown:
            raise ValueError(f"unknown metric columns: {sorted(unknown)}")
        row = ["" if values.get(c) is None else values.get(c, "") for c in self.columns]
        self._writer.writerow(row)
        self._fh.flush()
        self.rows_written += 1

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
