"""Piecewise-linear angular warps around an anchor origin.

A warp maps each clockwise sector of a source angle triple linearly onto the
matching sector of a target triple and scales radii by ``radial_scale``.
Canonicalization targets adh -> pi/2 (straight down on screen), m1 -> pi and
m2 -> 0, which puts the Adh sector in the lower-left quadrant. Canonical
coordinates are centered on the anchor origin and measured in fractions of the
source-image diagonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    AttachmentAnchor,
    ImageDims,
    Point2,
    check_anchor,
    cw_span,
    reduce_angle,
    sector_index,
)

CANONICAL_ANGLES = (math.pi / 2, math.pi, TWO_PI)


@dataclass(frozen=True)
class CanonicalPoint:
    x: float
    y: float

    @property
    def radius(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class AngularWarp:
    origin: Point2
    source_angles: tuple[float, float, float]
    target_angles: tuple[float, float, float]
    radial_scale: float = 1.0

    def __post_init__(self):
        for angles in (self.source_angles, self.target_angles):
            check_anchor(AttachmentAnchor(self.origin, *angles))
        if not (math.isfinite(self.radial_scale) and self.radial_scale > 0):
            raise ValueError(f"radial_scale must be finite and positive, got {self.radial_scale}")

    def inverse_angles(self) -> AngularWarp:
        """Same origin and scale with source and target triples swapped."""
        return AngularWarp(self.origin, self.target_angles, self.source_angles, self.radial_scale)


def _spans(angles) -> tuple[float, float, float]:
    a, m1, m2 = angles
    return (cw_span(a, m1), cw_span(m1, m2), cw_span(m2, a))


def remap_angle(theta: float, src, dst) -> float:
    """Scalar piecewise-linear angle map from sector triple ``src`` to ``dst``."""
    theta = reduce_angle(theta)
    src_spans = _spans(src)
    from_adh = cw_span(src[0], theta)
    if from_adh < src_spans[0]:
        i, t = 0, from_adh
    else:
        from_m1 = cw_span(src[1], theta)
        if from_m1 < src_spans[1]:
            i, t = 1, from_m1
        else:
            i, t = 2, cw_span(src[2], theta)
    frac = t / src_spans[i]
    return reduce_angle(dst[i] + frac * _spans(dst)[i])


def remap_angles(theta: np.ndarray, src, dst) -> np.ndarray:
    """Vectorized :func:`remap_angle`."""
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    idx = sector_index(theta, src)
    src_start = np.array(src, dtype=float)[idx]
    src_span = np.array(_spans(src))[idx]
    dst_start = np.array(dst, dtype=float)[idx]
    dst_span = np.array(_spans(dst))[idx]
    frac = np.mod(theta - src_start, TWO_PI) / src_span
    return np.mod(dst_start + frac * dst_span, TWO_PI)


def build_canonicalizer(a: AttachmentAnchor, img: ImageDims) -> AngularWarp:
    check_anchor(a)
    return AngularWarp(a.origin, a.angles, CANONICAL_ANGLES, 1.0 / img.diagonal)


def warp_point(w: AngularWarp, p: Point2) -> CanonicalPoint:
    dx, dy = p.x - w.origin.x, p.y - w.origin.y
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise ValueError("warp undefined at the warp origin")
    theta = remap_angle(math.atan2(dy, dx), w.source_angles, w.target_angles)
    r_out = r * w.radial_scale
    return CanonicalPoint(r_out * math.cos(theta), r_out * math.sin(theta))


def unwarp_point(w: AngularWarp, c: CanonicalPoint) -> Point2:
    r = math.hypot(c.x, c.y)
    if r == 0.0:
        raise ValueError("unwarp undefined at the canonical origin")
    theta = remap_angle(math.atan2(c.y, c.x), w.target_angles, w.source_angles)
    r_src = r / w.radial_scale
    return Point2(w.origin.x + r_src * math.cos(theta), w.origin.y + r_src * math.sin(theta))


def map_point(w: AngularWarp, p: Point2) -> Point2:
    """Apply the angular part of ``w`` in pixel space, keeping radius and origin.

    The warp origin itself is a fixed point.
    """
    if p == w.origin:
        return p
    c = warp_point(w, p)
    return Point2(w.origin.x + c.x / w.radial_scale, w.origin.y + c.y / w.radial_scale)


def _bilinear(src: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample ``src`` (H, W, C) at continuous pixel coords (pixel centers at i + 0.5).

    Coordinates outside the image area ``[0, W] x [0, H]`` yield 0; inside it,
    edge pixels are replicated up to the border.
    """
    h, w = src.shape[:2]
    inside = (xs >= 0) & (xs <= w) & (ys >= 0) & (ys <= h)
    u = np.clip(xs - 0.5, 0.0, w - 1.0)
    v = np.clip(ys - 0.5, 0.0, h - 1.0)
    x0 = np.floor(u).astype(np.int64)
    y0 = np.floor(v).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (u - x0)[..., None]
    fy = (v - y0)[..., None]
    img = src.astype(np.float64)
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bottom = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    out = top * (1 - fy) + bottom * fy
    out[~inside] = 0.0
    return out


def warp_raster(w: AngularWarp, src: np.ndarray, out_dims: ImageDims | None = None) -> np.ndarray:
    """Backward-map an (H, W, 3) raster through the angular part of ``w``.

    The output shares the source pixel frame: the warp origin stays put and
    radii are preserved, so only the angular layout around the origin changes.
    Each output pixel center is pulled back with the inverse angle map and
    sampled bilinearly; samples outside the source image are black.
    """
    src = np.asarray(src)
    if src.ndim != 3 or src.shape[0] == 0 or src.shape[1] == 0:
        raise ValueError(f"raster must be a non-empty (H, W, C) array, got shape {src.shape}")
    if out_dims is None:
        out_h, out_w = src.shape[:2]
    else:
        out_w, out_h = int(out_dims.width), int(out_dims.height)
    ys, xs = np.mgrid[0:out_h, 0:out_w].astype(np.float64) + 0.5
    dx = xs - w.origin.x
    dy = ys - w.origin.y
    r = np.hypot(dx, dy)
    theta = remap_angles(np.arctan2(dy, dx), w.target_angles, w.source_angles)
    sx = np.where(r > 0, w.origin.x + r * np.cos(theta), xs)
    sy = np.where(r > 0, w.origin.y + r * np.sin(theta), ys)
    out = _bilinear(src, sx, sy)
    if np.issubdtype(src.dtype, np.integer):
        info = np.iinfo(src.dtype)
        return np.clip(np.rint(out), info.min, info.max).astype(src.dtype)
    return out.astype(src.dtype)
