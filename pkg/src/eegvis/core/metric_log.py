"""CSV metric logs written row by row."""

import csv
from pathlib import Path
from typing import Any


class MetricLog:
    """Ordered metric rows with a fixed header, mirrored to a CSV file.

    Missing columns are written as empty cells.
    """

    def __init__(self, columns: list[str], path: Path | None = None, comments: list[str] | None = None):
        self.columns = list(columns)
        self.path = Path(path) if path is not None else None
        self.comments = list(comments or [])
        self.rows: list[dict[str, Any]] = []
        if self.path is not None:
            self._rewrite()

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: dict[str, Any]) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"Unknown metric columns: {sorted(unknown)}")
        self.rows.append(dict(row))
        if self.path is not None:
            with open(self.path, "a", newline="") as f:
                csv.DictWriter(f, fieldnames=self.columns, restval="").writerow(row)

    def _rewrite(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", newline="") as f:
            for comment in self.comments:
                f.write(f"# {comment}\n")
            writer = csv.DictWriter(f, fieldnames=self.columns, restval="")
            writer.writeheader()
            writer.writerows(self.rows)

    def set_comments(self, comments: list[str]) -> None:
        """Replace the leading ``#`` comment lines and rewrite the file."""
        self.comments = list(comments)
        if self.path is not None:
            self._rewrite()

    def column(self, name: str) -> list[Any]:
        return [row.get(name) for row in self.rows]


def read_metric_log(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    """Read a metric CSV, returning (comment lines, rows)."""
    with open(path, newline="") as f:
        lines = f.read().splitlines()
    comments = [line[2:] for line in lines if line.startswith("# ")]
    body = [line for line in lines if not line.startswith("#")]
    return comments, list(csv.DictReader(body))
