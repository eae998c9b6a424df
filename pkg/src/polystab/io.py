"""Deterministic file output: CSV, JSON, SVG and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

__all__ = [
    "Layer",
    "csv_text",
    "emit_svg",
    "format_number",
    "json_text",
    "to_jsonable",
    "write_manifest",
    "write_text",
]


def format_number(x):
    """17 significant digits for floats, plain digits for integers and booleans."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".16e")


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(v) for v in row])
    return buf.getvalue()


def to_jsonable(obj):
    """Plain JSON types; complex numbers become [re, im], NaN/inf become null."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_text(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_text(path, text):
    # binary write keeps "\n" line endings on every platform
    with open(path, "wb") as fh:
        fh.write(text.encode("utf-8"))


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def write_manifest(out_dir, files, config):
    """manifest.json listing every emitted file (with size and sha256) and the config."""
    entries = []
    for name in sorted(files):
        p = os.path.join(out_dir, name)
        entries.append({"name": name, "bytes": os.path.getsize(p), "sha256": _sha256(p)})
    entries.append({"name": "manifest.json"})
    write_text(os.path.join(out_dir, "manifest.json"), json_text({"config": config, "files": entries}))


# ---------------------------------------------------------------- SVG

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass
class Layer:
    """One drawable layer.

    kind "points": ``data`` is a complex array.
    kind "polylines": ``data`` is a list of complex vertex arrays; a chain whose
    last vertex repeats the first is drawn closed.
    kind "cells": ``data`` is (GridSpec-like with .re/.im/.steps, boolean mask
    of shape (N_im, N_re)).
    """

    kind: str
    data: object
    label: str = ""
    color: Optional[str] = None
    extra: dict = field(default_factory=dict)


def _bounds(layers):
    pts = []
    for L in layers:
        if L.kind == "points":
            pts.append(np.asarray(L.data, dtype=complex).ravel())
        elif L.kind == "polylines":
            pts.extend(np.asarray(c, dtype=complex).ravel() for c in L.data)
        elif L.kind == "cells":
            spec, _ = L.data
            r = spec.region
            pts.append(np.array([r[0] + 1j * r[2], r[1] + 1j * r[3]]))
    pts = np.concatenate(pts) if pts else np.zeros(0, dtype=complex)
    pts = pts[np.isfinite(pts)]
    if pts.size == 0:
        return (-1.0, 1.0, -1.0, 1.0)
    x0, x1 = float(pts.real.min()), float(pts.real.max())
    y0, y1 = float(pts.imag.min()), float(pts.imag.max())
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.05 * span
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - span / 2, x1 + span / 2
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - span / 2, y1 + span / 2
    return (x0 - pad, x1 + pad, y0 - pad, y1 + pad)


def _f(x):
    return format(x, ".3f")


def emit_svg(layers, viewport=None, title="", size=480, margin=40):
    """Standalone SVG with axes, a legend and layers drawn in the given order.

    ``viewport`` is (re_min, re_max, im_min, im_max) in data coordinates and
    maps onto the square plot area; the default fits all layers.
    """
    if viewport is None:
        viewport = _bounds(layers)
    x0, x1, y0, y1 = (float(v) for v in viewport)
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"empty viewport {viewport}")
    W = size + 2 * margin
    legend_h = 18 * sum(1 for L in layers if L.label)
    H = size + 2 * margin + legend_h

    def px(z):
        return margin + (z.real - x0) / (x1 - x0) * size

    def py(z):
        return margin + (y1 - z.imag) / (y1 - y0) * size

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{margin}" y="{margin // 2}" font-size="13" font-family="sans-serif">{escape(title)}</text>')
    out.append(f'<defs><clipPath id="plot"><rect x="{margin}" y="{margin}" width="{size}" height="{size}"/></clipPath></defs>')
    out.append('<g clip-path="url(#plot)">')
    for k, L in enumerate(layers):
        color = L.color or _PALETTE[k % len(_PALETTE)]
        if L.kind == "cells":
            spec, mask = L.data
            mask = np.asarray(mask, dtype=bool)
            hr, hi = spec.steps
            re, im = spec.re, spec.im
            wpx = hr / (x1 - x0) * size
            hpx = hi / (y1 - y0) * size
            parts = []
            for j in range(mask.shape[0]):
                row = mask[j]
                i = 0
                while i < row.size:
                    if not row[i]:
                        i += 1
                        continue
                    s = i
                    while i < row.size and row[i]:
                        i += 1
                    left = px(complex(re[s] - hr / 2, 0))
                    top = py(complex(0, im[j] + hi / 2))
                    parts.append(
                        f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(wpx * (i - s))}" height="{_f(hpx)}"/>'
                    )
            out.append(f'<g fill="{color}" fill-opacity="0.35" stroke="none">')
            out.extend(parts)
            out.append("</g>")
        elif L.kind == "polylines":
            out.append(f'<g fill="none" stroke="{color}" stroke-width="1.2">')
            for chain in L.data:
                chain = np.asarray(chain, dtype=complex).ravel()
                if chain.size == 0:
                    continue
                closed = chain.size > 2 and chain[0] == chain[-1]
                verts = chain[:-1] if closed else chain
                d = "M " + " L ".join(f"{_f(px(z))} {_f(py(z))}" for z in verts)
                out.append(f'<path d="{d}{" Z" if closed else ""}"/>')
            out.append("</g>")
        elif L.kind == "points":
            r = L.extra.get("radius", 3)
            out.append(f'<g fill="{color}" stroke="none">')
            for z in np.asarray(L.data, dtype=complex).ravel():
                if np.isfinite(z):
                    out.append(f'<circle cx="{_f(px(z))}" cy="{_f(py(z))}" r="{r}"/>')
            out.append("</g>")
        else:
            raise ValueError(f"unknown layer kind {L.kind!r}")
    out.append("</g>")

    # axes: frame, real and imaginary axes when visible, end labels
    out.append('<g stroke="black" stroke-width="1" fill="none">')
    out.append(f'<rect x="{margin}" y="{margin}" width="{size}" height="{size}"/>')
    if x0 <= 0 <= x1:
        xa = _f(px(0j))
        out.append(f'<line x1="{xa}" y1="{margin}" x2="{xa}" y2="{margin + size}" stroke-dasharray="3,3"/>')
    if y0 <= 0 <= y1:
        ya = _f(py(0j))
        out.append(f'<line x1="{margin}" y1="{ya}" x2="{margin + size}" y2="{ya}" stroke-dasharray="3,3"/>')
    out.append("</g>")
    fs = 'font-size="10" font-family="sans-serif"'
    out.append(f'<text x="{margin}" y="{margin + size + 14}" {fs}>{x0:.4g}</text>')
    out.append(f'<text x="{margin + size}" y="{margin + size + 14}" {fs} text-anchor="end">{x1:.4g}</text>')
    out.append(f'<text x="{margin - 4}" y="{margin + size}" {fs} text-anchor="end">{y0:.4g}</text>')
    out.append(f'<text x="{margin - 4}" y="{margin + 8}" {fs} text-anchor="end">{y1:.4g}</text>')
    out.append(f'<text x="{margin + size / 2}" y="{margin + size + 28}" {fs} text-anchor="middle">Re</text>')
    out.append(f'<text x="{margin - 28}" y="{margin + size / 2}" {fs}>Im</text>')

    # legend swatches are rects so point layers stay the only circles
    y = margin + size + 36
    out.append('<g id="legend">')
    for k, L in enumerate(layers):
        if not L.label:
            continue
        color = L.color or _PALETTE[k % len(_PALETTE)]
        out.append(f'<rect x="{margin}" y="{y}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{margin + 16}" y="{y + 9}" {fs}>{escape(L.label)}</text>')
        y += 18
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
