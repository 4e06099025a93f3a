"""Tabular estimate reports with a fixed, deterministic CSV rendering.

Column order is fixed per experiment kind; floats are rendered with
``repr`` (shortest round-trip, ``.`` decimal separator) and rows end with
a line feed, so a fixed seed yields byte-identical files.  Aggregates are
appended as rows of the same width whose first cell is ``summary:<key>``
and whose last cell is the value.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def render_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        sign = "+" if value.imag >= 0 else "-"
        return f"{value.real!r}{sign}{abs(value.imag)!r}j"
    return str(value)


@dataclass
class EstimateReport:
    """Rows of one swept estimate plus the aggregated empirical constants."""

    kind: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError("row width mismatch")
        self.rows.append(tuple(row))

    @property
    def max_ratio(self) -> float:
        if "ratio" not in self.columns:
            raise ValueError("report has no ratio column")
        idx = self.columns.index("ratio")
        values = [r[idx] for r in self.rows if r[idx] == r[idx]]
        return max(values) if values else float("nan")

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(render_cell(v) for v in row))
        pad = max(0, len(self.columns) - 2)
        for key in sorted(self.summary):
            cells = [f"summary:{key}"] + [""] * pad + [render_cell(self.summary[key])]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
