"""Table emission for cross-evaluation matrices: one file per metric in
CSV/Markdown/HTML, or the whole matrix as JSON."""

from __future__ import annotations

import json
from pathlib import Path

from .metrics import METRIC_FIELDS
from .pipeline import CrossEvalMatrix

FORMATS = ("csv", "markdown", "html", "json")

# three-stop scale mirroring the usual red -> yellow -> green conditional fill
_HEAT_STOPS = ((0xE6, 0x7C, 0x73), (0xFF, 0xD6, 0x66), (0x57, 0xBB, 0x8A))


def cell_text(value: float, half_width: float | None) -> str:
    if half_width is None:
        return f"{value:.4f}"
    return f"{value:.4f} (±{half_width:.4f})"


def _heat_color(value: float, vmin: float, vmax: float) -> str:
    if vmax <= vmin:
        t = 0.5
    else:
        t = (value - vmin) / (vmax - vmin)
    if t < 0.5:
        a, b, u = _HEAT_STOPS[0], _HEAT_STOPS[1], t * 2.0
    else:
        a, b, u = _HEAT_STOPS[1], _HEAT_STOPS[2], (t - 0.5) * 2.0
    rgb = tuple(round(x + (y - x) * u) for x, y in zip(a, b))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _metric_cells(matrix: CrossEvalMatrix, metric: str):
    rows = []
    for test in matrix.test_ranges:
        row = []
        for train in matrix.train_ranges:
            b = matrix.cell(test, train)
            row.append((b.value(metric), b.ci.get(metric)))
        rows.append(row)
    return rows


def _emit_csv(matrix: CrossEvalMatrix, metric: str, path: Path) -> None:
    lines = [",".join(["test_set/train_set", *matrix.train_ranges])]
    for test, row in zip(matrix.test_ranges, _metric_cells(matrix, metric)):
        lines.append(",".join([test, *[cell_text(v, hw) for v, hw in row]]))
    path.write_text("\n".join(lines) + "\n")


def _emit_markdown(matrix: CrossEvalMatrix, metric: str, path: Path) -> None:
    head = "| test_set/train_set | " + " | ".join(matrix.train_ranges) + " |"
    sep = "|" + " --- |" * (len(matrix.train_ranges) + 1)
    lines = [f"## {metric}", "", head, sep]
    for test, row in zip(matrix.test_ranges, _metric_cells(matrix, metric)):
        cells = " | ".join(cell_text(v, hw) for v, hw in row)
        lines.append(f"| {test} | {cells} |")
    path.write_text("\n".join(lines) + "\n")


def _emit_html(matrix: CrossEvalMatrix, metric: str, path: Path) -> None:
    rows = _metric_cells(matrix, metric)
    values = [v for row in rows for v, _ in row]
    vmin, vmax = min(values), max(values)
    out = [
        "<!doctype html><html><head><meta charset='utf-8'>",
        f"<title>{metric}</title></head><body>",
        f"<h2>{metric}</h2>",
        "<table border='1' cellspacing='0' cellpadding='4'>",
        "<tr><th>test_set/train_set</th>"
        + "".join(f"<th>{t}</th>" for t in matrix.train_ranges)
        + "</tr>",
    ]
    for test, row in zip(matrix.test_ranges, rows):
        tds = "".join(
            f"<td style='background:{_heat_color(v, vmin, vmax)}'>{cell_text(v, hw)}</td>"
            for v, hw in row
        )
        out.append(f"<tr><th>{test}</th>{tds}</tr>")
    out.append("</table></body></html>")
    path.write_text("\n".join(out) + "\n")


def emit_report(matrix: CrossEvalMatrix, fmt: str, out_dir: str | Path) -> list[Path]:
    """Write the matrix in the requested format; returns the files written."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if fmt == "json":
        path = out_dir / "matrix.json"
        path.write_text(json.dumps(matrix.to_doc(), indent=2, sort_keys=True) + "\n")
        return [path]
    ext = {"csv": "csv", "markdown": "md", "html": "html"}[fmt]
    emit = {"csv": _emit_csv, "markdown": _emit_markdown, "html": _emit_html}[fmt]
    for metric in METRIC_FIELDS:
        path = out_dir / f"matrix_{metric}.{ext}"
        emit(matrix, metric, path)
        written.append(path)
    return written
