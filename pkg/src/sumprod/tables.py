"""Plain tables and their CSV / plot-data emitters."""

import csv
from dataclasses import dataclass, field


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):
        return _fmt(v.item())
    return str(v)


def _open(path):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def emit_csv(table, path):
    """Header plus one line per row, columns in table order."""
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        w.writerows([_fmt(v) for v in r] for r in table.rows)


def emit_plotdata(table, path, x=None):
    """(x, y, series) triples: one series per non-x column."""
    x = table.columns[0] if x is None else x
    xi = table.columns.index(x)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "y", "series"))
        for j, name in enumerate(table.columns):
            if j == xi:
                continue
            for r in table.rows:
                w.writerow((_fmt(r[xi]), _fmt(r[j]), name))
