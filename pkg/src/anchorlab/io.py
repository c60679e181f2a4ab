"""Dataset, report and raster file formats.

* Datasets are JSONL, one sample per line. Unknown top-level keys survive a
  read/write round-trip.
* Reports are CSV with floats written at 17 significant digits.
* Scatter plots are standalone SVG (600 x 600 viewport).
* Rasters are binary PPM (P6).
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import AnchorCase, AttachmentAnchor, ImageDims, Point2, Sample

KNOWN_KEYS = ("image", "dissection", "grasp", "anchor", "meta")


class DataError(ValueError):
    """Malformed input data; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _point(d) -> Point2:
    return Point2(float(d["x"]), float(d["y"]))


def sample_from_dict(d: dict) -> Sample:
    img = ImageDims(d["image"]["w"], d["image"]["h"])
    anchor = None
    if d.get("anchor") is not None:
        a = d["anchor"]
        anchor = AttachmentAnchor(_point(a["origin"]), float(a["theta_adh"]), float(a["theta_m1"]),
                                  float(a["theta_m2"]), AnchorCase(int(a["case"])))
    meta = {str(k): str(v) for k, v in (d.get("meta") or {}).items()}
    extra = {k: v for k, v in d.items() if k not in KNOWN_KEYS}
    return Sample(img, _point(d["dissection"]), _point(d["grasp"]), anchor, meta, extra)


def sample_to_dict(s: Sample) -> dict:
    d = {
        "image": {"w": s.image.width, "h": s.image.height},
        "dissection": {"x": s.dissection.x, "y": s.dissection.y},
        "grasp": {"x": s.grasp.x, "y": s.grasp.y},
    }
    if s.anchor is not None:
        a = s.anchor
        d["anchor"] = {
            "case": int(a.case),
            "origin": {"x": a.origin.x, "y": a.origin.y},
            "theta_adh": a.theta_adh,
            "theta_m1": a.theta_m1,
            "theta_m2": a.theta_m2,
        }
    d["meta"] = dict(s.meta)
    d.update(s.extra)
    return d


def dumps_samples(samples: Iterable[Sample]) -> str:
    return "".join(json.dumps(sample_to_dict(s), separators=(",", ":")) + "\n" for s in samples)


def loads_samples(text: str) -> list[Sample]:
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            samples.append(sample_from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"malformed sample: {exc}", lineno) from exc
    return samples


def read_samples(path) -> list[Sample]:
    return loads_samples(Path(path).read_text(encoding="utf-8"))


def write_samples(path, samples: Iterable[Sample]) -> None:
    Path(path).write_text(dumps_samples(samples), encoding="utf-8")


def write_jsonl(path, rows: Iterable[dict]) -> None:
    Path(path).write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), encoding="utf-8")


def fmt_float(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_ppm(path, raster: np.ndarray) -> None:
    raster = np.asarray(raster)
    if raster.dtype != np.uint8 or raster.ndim != 3 or raster.shape[2] != 3:
        raise ValueError("PPM export needs an (H, W, 3) uint8 raster")
    h, w = raster.shape[:2]
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + raster.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise DataError("only 8-bit binary PPM (P6) is supported")
    w, h = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(data[pos + 1:pos + 1 + w * h * 3], dtype=np.uint8)
    return pixels.reshape(h, w, 3).copy()


def scatter_svg(title: str, series: Sequence[tuple[str, str, Sequence[tuple[float, float]]]],
                bounds: tuple[float, float], unit: str) -> str:
    """Scatter plot of point series on a square canvas spanning ``bounds`` on both axes.

    ``series`` entries are ``(label, color, points)``; y grows downward as in
    image coordinates. Circles and squares alternate as markers. Points
    outside ``bounds`` are dropped from the plot but still counted in the legend.
    """
    size, pad = 600, 50
    lo, hi = bounds
    scale = (size - 2 * pad) / (hi - lo)

    def sx(x):
        return pad + (x - lo) * scale

    def sy(y):
        return pad + (y - lo) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<text x="{size / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>',
        f'<rect x="{pad}" y="{pad}" width="{size - 2 * pad}" height="{size - 2 * pad}" fill="none" stroke="#444"/>',
        f'<text x="{size - pad}" y="{size - 15}" text-anchor="end" font-family="sans-serif" '
        f'font-size="11">x, y in {unit}; range [{lo:g}, {hi:g}]</text>',
    ]
    if lo < 0 < hi:
        out.append(f'<line x1="{pad}" y1="{sy(0):.2f}" x2="{size - pad}" y2="{sy(0):.2f}" stroke="#888"/>')
        out.append(f'<line x1="{sx(0):.2f}" y1="{pad}" x2="{sx(0):.2f}" y2="{size - pad}" stroke="#888"/>')
    for k, (label, color, points) in enumerate(series):
        out.append(f'<g fill="{color}" fill-opacity="0.5">')
        for x, y in points:
            if not (lo <= x <= hi and lo <= y <= hi):
                continue
            if k % 2 == 0:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5"/>')
            else:
                out.append(f'<rect x="{sx(x) - 2.5:.2f}" y="{sy(y) - 2.5:.2f}" width="5" height="5"/>')
        out.append("</g>")
        ly = pad + 16 + 18 * k
        out.append(f'<rect x="{pad + 8}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{pad + 24}" y="{ly}" font-family="sans-serif" font-size="12">{label} (n={len(points)})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
