"""Deterministic serialization (JSON, CSV), hand-written SVG, histograms."""
from __future__ import annotations

import json
import math
import platform
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy
from scipy import stats

from . import __version__


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    if x == 0:
        return "0"
    return format(x, ".17g")


def _json(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or obj is True or obj is False:
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        return fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _json({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k), indent, 0)}: {_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_json(v, indent, 0) for v in obj) + "]"
        items = [pad + _json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    """JSON with floats written to 17 significant digits and insertion-ordered keys."""
    return _json(obj, indent, 0) + "\n"


def meta_block(config: dict) -> dict:
    return {"config": config,
            "versions": {"tenspec": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "python": platform.python_version()}}


def table_to_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(columns)]
    for r in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, (float, np.floating, Fraction)) else str(v)
                              for v in r))
    return "\n".join(lines) + "\n"


def table_to_json(columns: Sequence[str], rows: Iterable[Sequence], meta: dict, extra: dict | None = None) -> str:
    data = [dict(zip(columns, r)) for r in rows]
    out = {"meta": meta, "data": data}
    if extra:
        out.update(extra)
    return dumps(out)


def read_table(path: str) -> dict[str, np.ndarray]:
    """Columns of a CSV or JSON table written by this package."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)["data"]
        cols = list(data[0].keys()) if data else []
        return {c: np.array([float("nan") if r[c] is None else r[c] for r in data], dtype=float) for c in cols}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    cols = lines[0].split(",")
    vals = np.array([[float(x) if x != "null" else float("nan") for x in ln.split(",")] for ln in lines[1:]])
    vals = vals.reshape(len(lines) - 1, len(cols))
    return {c: vals[:, i] for i, c in enumerate(cols)}


# --- histogram and KS ------------------------------------------------------------

@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray

    def rows(self):
        for i in range(len(self.counts)):
            yield (float(self.edges[i]), float(self.edges[i + 1]), int(self.counts[i]), float(self.density[i]))


def emit_histogram(values, bins: int = 50, normalize: bool = True, range_=None) -> Histogram:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("histogram of an empty sample")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts, edges = np.histogram(v, bins=bins, range=range_)
    width = np.diff(edges)
    dens = counts / (counts.sum() * width) if normalize else counts.astype(float)
    return Histogram(edges, counts, dens)


def ks_distance(values, cdf) -> float:
    """Kolmogorov-Smirnov distance between the sample and a vectorized CDF."""
    return float(stats.kstest(np.asarray(values, dtype=float), cdf).statistic)


# --- SVG ------------------------------------------------------------------------------

PALETTE = ("#d4a017", "#2e8b57", "#1f77b4", "#c0392b", "#8e44ad", "#16a085", "#7f8c8d")


class SVGCanvas:
    """Minimal SVG writer with a data-to-pixel map; output is byte-deterministic."""

    def __init__(self, xr, yr, width: int = 640, height: int = 480, margin: int = 50, title: str = ""):
        self.xr, self.yr = (float(xr[0]), float(xr[1])), (float(yr[0]), float(yr[1]))
        self.w, self.h, self.m = width, height, margin
        self.parts: list[str] = []
        self.title = title

    def px(self, x, y):
        (x0, x1), (y0, y1) = self.xr, self.yr
        u = self.m + (x - x0) / (x1 - x0) * (self.w - 2 * self.m)
        v = self.h - self.m - (y - y0) / (y1 - y0) * (self.h - 2 * self.m)
        return u, v

    @staticmethod
    def _n(v: float) -> str:
        return f"{v:.3f}"

    def rect(self, x0, y0, x1, y1, fill, opacity=1.0):
        u0, v0 = self.px(x0, y1)
        u1, v1 = self.px(x1, y0)
        self.parts.append(f'<rect x="{self._n(u0)}" y="{self._n(v0)}" width="{self._n(u1 - u0)}" '
                          f'height="{self._n(v1 - v0)}" fill="{fill}" fill-opacity="{opacity:g}" stroke="none"/>')

    def polyline(self, xs, ys, stroke="#000", width=1.5, dash: str | None = None):
        pts = " ".join(f"{self._n(u)},{self._n(v)}" for u, v in (self.px(x, y) for x, y in zip(xs, ys)))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width:g}"{d}/>')

    def scatter(self, xs, ys, r=2.0, fill="#1f77b4"):
        for x, y in zip(xs, ys):
            u, v = self.px(x, y)
            self.parts.append(f'<circle cx="{self._n(u)}" cy="{self._n(v)}" r="{r:g}" fill="{fill}"/>')

    def circle(self, x, y, radius, stroke="#000", width=1.0):
        u, v = self.px(x, y)
        ru = radius / (self.xr[1] - self.xr[0]) * (self.w - 2 * self.m)
        rv = radius / (self.yr[1] - self.yr[0]) * (self.h - 2 * self.m)
        self.parts.append(f'<ellipse cx="{self._n(u)}" cy="{self._n(v)}" rx="{self._n(ru)}" ry="{self._n(rv)}" '
                          f'fill="none" stroke="{stroke}" stroke-width="{width:g}"/>')

    def text(self, x, y, s, size=12, anchor="middle"):
        self.parts.append(f'<text x="{self._n(x)}" y="{self._n(y)}" font-size="{size}" '
                          f'font-family="sans-serif" text-anchor="{anchor}">{_esc(s)}</text>')

    def axes(self, xlabel="", ylabel="", ticks: int = 5):
        (x0, x1), (y0, y1) = self.xr, self.yr
        m, w, h = self.m, self.w, self.h
        self.parts.append(f'<rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" '
                          f'fill="none" stroke="#000" stroke-width="1"/>')
        for i in range(ticks + 1):
            xv = x0 + (x1 - x0) * i / ticks
            yv = y0 + (y1 - y0) * i / ticks
            u, _ = self.px(xv, y0)
            _, v = self.px(x0, yv)
            self.text(u, h - m + 16, f"{xv:.3g}", 10)
            self.text(m - 6, v + 4, f"{yv:.3g}", 10, anchor="end")
        if xlabel:
            self.text(w / 2, h - 10, xlabel)
        if ylabel:
            self.parts.append(f'<text x="14" y="{h / 2:.3f}" font-size="12" font-family="sans-serif" '
                              f'text-anchor="middle" transform="rotate(-90 14 {h / 2:.3f})">{_esc(ylabel)}</text>')
        if self.title:
            self.text(w / 2, m - 16, self.title, 13)

    def to_string(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        body = "\n".join(self.parts)
        return f'{head}\n<rect width="100%" height="100%" fill="#fff"/>\n{body}\n</svg>\n'


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
