"""Deterministic text exports: CSV, JSON and minimal SVG line charts.

All writers emit LF line endings and format floats with ``repr`` (shortest
round-trip), so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json


def fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def svg_line_chart(path, series, title="", xlabel="", ylabel="",
                   width=640, height=420):
    """Plot (label, x, y) series as polylines in a standalone SVG 1.1 file."""
    pad = 56
    xs = [float(v) for _, x, _ in series for v in x]
    ys = [float(v) for _, _, y in series for v in y]
    if not xs or not ys:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
        f'y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {height / 2:.1f})">{ylabel}</text>'
        )
    for i, (label, x, y) in enumerate(series):
        color = colors[i % len(colors)]
        points = " ".join(f"{sx(float(a)):.2f},{sy(float(b)):.2f}" for a, b in zip(x, y))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{points}"/>'
        )
        if label:
            yy = pad + 16 * i
            parts.append(
                f'<line x1="{width - pad - 90}" y1="{yy}" x2="{width - pad - 70}" '
                f'y2="{yy}" stroke="{color}" stroke-width="1.5"/>'
            )
            parts.append(
                f'<text x="{width - pad - 64}" y="{yy + 4}" font-family="sans-serif" '
                f'font-size="11">{label}</text>'
            )
    # axis extremes
    parts.append(
        f'<text x="{pad}" y="{height - pad + 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="10">{x0:.4g}</text>'
    )
    parts.append(
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="10">{x1:.4g}</text>'
    )
    parts.append(
        f'<text x="{pad - 6}" y="{height - pad + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{y0:.6g}</text>'
    )
    parts.append(
        f'<text x="{pad - 6}" y="{pad + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{y1:.6g}</text>'
    )
    parts.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
