"""Plain-text chart and table emitters (CSV, static SVG)."""

from __future__ import annotations

import csv
from xml.sax.saxutils import escape

from ..errors import IoError

BAR_H = 18
GAP = 4
LABEL_W = 160
PLOT_W = 420
MARGIN = 20


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def correlation_svg(records, title="Feature correlation with label") -> str:
    """Horizontal bar per record, zero line in the middle, bars scaled to max |r|."""
    scale = max((abs(r.r) for r in records), default=0.0) or 1.0
    top = MARGIN + 30
    height = top + len(records) * (BAR_H + GAP) + 40
    width = LABEL_W + PLOT_W + 2 * MARGIN + 60
    zero = MARGIN + LABEL_W + PLOT_W / 2
    half = PLOT_W / 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{width / 2:.1f}" y="{MARGIN + 10}" text-anchor="middle" '
        f'font-size="13">{escape(title)}</text>',
    ]
    for i, rec in enumerate(records):
        y = top + i * (BAR_H + GAP)
        length = half * abs(rec.r) / scale
        x = zero if rec.r >= 0 else zero - length
        fill = "#b2182b" if rec.r >= 0 else "#2166ac"
        out.append(f'<text x="{MARGIN + LABEL_W - 6}" y="{y + BAR_H - 5}" '
                   f'text-anchor="end">{escape(rec.feature_name)}</text>')
        out.append(f'<rect x="{x:.2f}" y="{y}" width="{length:.2f}" height="{BAR_H}" fill="{fill}"/>')
        out.append(f'<text x="{zero + half + 6:.1f}" y="{y + BAR_H - 5}">{rec.r:+.4f}</text>')
    axis_y = top + len(records) * (BAR_H + GAP)
    out += [
        f'<line x1="{zero:.1f}" y1="{top - 4}" x2="{zero:.1f}" y2="{axis_y}" stroke="#000"/>',
        f'<line x1="{zero - half:.1f}" y1="{axis_y}" x2="{zero + half:.1f}" y2="{axis_y}" stroke="#000"/>',
        f'<text x="{zero - half:.1f}" y="{axis_y + 14}" text-anchor="middle">{-scale:.3f}</text>',
        f'<text x="{zero:.1f}" y="{axis_y + 14}" text-anchor="middle">0</text>',
        f'<text x="{zero + half:.1f}" y="{axis_y + 14}" text-anchor="middle">{scale:.3f}</text>',
        f'<text x="{zero:.1f}" y="{axis_y + 30}" text-anchor="middle">Pearson r with label</text>',
        f'<text x="{MARGIN}" y="{top - 10}">feature</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"


def emit_correlation_chart(records, top, csv_path, svg_path=None):
    """Write the first ``top`` records (already ranked) as CSV and optionally SVG."""
    if top < 1:
        raise ValueError("top must be at least 1")
    rows = list(records)[:top]
    try:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "r"])
            for rec in rows:
                w.writerow([rec.feature_name, repr(float(rec.r))])
    except OSError as exc:
        raise IoError(f"cannot write {csv_path}: {exc}") from exc
    if svg_path is not None:
        _write(svg_path, correlation_svg(rows))
    return rows
