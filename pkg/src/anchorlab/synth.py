"""Synthetic labeled scenes following the three retraction cases.

Generation laws (radii in fractions of the image diagonal):

* Strand: D on the adhesion ray at ``r_D ~ U[0.05, 0.15]``, G further out on
  the same ray at ``r_D + U[0.05, 0.15]``.
* Triangle: D on the first mounting ray at ``r ~ U[0.05, 0.2]``; G inside Adh
  at ``theta_adh + U[0.1, 0.4] * width(Adh)``, ``r ~ U[0.1, 0.3]``.
* Plane: D on one of the mounting rays close to O (``r ~ U[0.01, 0.1]``); G
  anywhere in the middle 80% of Adh at ``r ~ U[0.1, 0.3]``.

Angular and radial Gaussian noise is then applied to D and G around O.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    EPS_SECTOR,
    TWO_PI,
    AnchorCase,
    AttachmentAnchor,
    ImageDims,
    Point2,
    Region,
    Sample,
    check_anchor,
    sector_index,
)

# Region colors used by render(); the origin pixel is black.
COLORS = {
    Region.ADH: (40, 90, 220),  # blue
    Region.MNT: (128, 128, 128),  # gray
    Region.DISS: (40, 170, 70),  # green
}
ORIGIN_COLOR = (0, 0, 0)

BASE_WIDTHS = (math.pi / 2, math.pi, math.pi / 2)
MAX_RETRIES = 1000

SURGERY_TYPES = ("sigmoid", "rectum", "hemicolectomy_left", "hemicolectomy_right")


def _default_surgeons() -> tuple[tuple[str, float], ...]:
    # skewed counts, a few dominant surgeons and a long tail
    weights = (30, 20, 15, 8, 7, 6, 5, 4, 3, 3, 2, 2, 2, 1)
    return tuple((f"s{i + 1:02d}", float(w)) for i, w in enumerate(weights))


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    count: int = 300
    case_mix: tuple[float, float, float] = (1.0, 1.0, 1.0)
    noise_angle: float = 0.03
    noise_radius: float = 0.005
    image: ImageDims = ImageDims(640, 480)
    origin_box: tuple[float, float, float, float] = (0.25, 0.25, 0.75, 0.75)
    width_jitter: float = 0.3
    surgery_types: tuple[tuple[str, float], ...] = tuple((t, 1.0) for t in SURGERY_TYPES)
    surgeons: tuple[tuple[str, float], ...] = field(default_factory=_default_surgeons)

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        if len(self.case_mix) != 3 or min(self.case_mix) < 0 or sum(self.case_mix) <= 0:
            raise ValueError("case_mix needs three nonnegative weights, not all zero")
        if self.noise_angle < 0 or self.noise_radius < 0:
            raise ValueError("noise parameters must be >= 0")
        x0, y0, x1, y1 = self.origin_box
        if not (0 <= x0 <= x1 <= 1 and 0 <= y0 <= y1 <= 1):
            raise ValueError("origin_box must be a normalized rectangle (x0, y0, x1, y1)")
        if not 0 <= self.width_jitter < 0.9:
            raise ValueError("width_jitter must lie in [0, 0.9)")
        for name in ("surgery_types", "surgeons"):
            dist = getattr(self, name)
            if not dist or min(w for _, w in dist) < 0 or sum(w for _, w in dist) <= 0:
                raise ValueError(f"{name} needs a nonempty categorical distribution")


def _categorical(rng: np.random.Generator, dist) -> str:
    labels = [k for k, _ in dist]
    weights = np.array([w for _, w in dist], dtype=float)
    return labels[int(rng.choice(len(labels), p=weights / weights.sum()))]


def _random_anchor(rng: np.random.Generator, cfg: SynthConfig, case: AnchorCase) -> AttachmentAnchor:
    x0, y0, x1, y1 = cfg.origin_box
    img = cfg.image
    origin = Point2(rng.uniform(x0, x1) * img.width, rng.uniform(y0, y1) * img.height)
    widths = np.array(BASE_WIDTHS) * rng.uniform(1 - cfg.width_jitter, 1 + cfg.width_jitter, size=3)
    widths *= TWO_PI / widths.sum()
    floor = 10 * EPS_SECTOR
    widths = np.maximum(widths, floor)
    widths *= TWO_PI / widths.sum()
    adh = rng.uniform(0, TWO_PI)
    a = AttachmentAnchor(origin, adh, adh + widths[0], adh + widths[0] + widths[1], case)
    return check_anchor(a)


def _polar(origin: Point2, theta: float, r: float) -> Point2:
    return Point2(origin.x + r * math.cos(theta), origin.y + r * math.sin(theta))


def _case_points(rng: np.random.Generator, a: AttachmentAnchor) -> tuple[float, float, float, float]:
    """Noise-free (theta_D, r_D, theta_G, r_G), radii in diagonal fractions."""
    w_adh = a.sector_widths[0]
    if a.case is AnchorCase.STRAND:
        r_d = rng.uniform(0.05, 0.15)
        r_g = r_d + rng.uniform(0.05, 0.15)
        return a.theta_adh, r_d, a.theta_adh, r_g
    if a.case is AnchorCase.TRIANGLE:
        r_d = rng.uniform(0.05, 0.2)
        theta_g = a.theta_adh + rng.uniform(0.1, 0.4) * w_adh
        return a.theta_m1, r_d, theta_g, rng.uniform(0.1, 0.3)
    theta_d = a.theta_m1 if rng.random() < 0.5 else a.theta_m2
    r_d = rng.uniform(0.01, 0.1)
    theta_g = a.theta_adh + rng.uniform(0.1, 0.9) * w_adh
    return theta_d, r_d, theta_g, rng.uniform(0.1, 0.3)


def _noisy(rng: np.random.Generator, cfg: SynthConfig, theta: float, r: float) -> tuple[float, float]:
    if cfg.noise_angle > 0:
        theta += rng.normal(0.0, cfg.noise_angle)
    if cfg.noise_radius > 0:
        r += rng.normal(0.0, cfg.noise_radius)
    return theta, r


def generate_one(cfg: SynthConfig, rng: np.random.Generator, case: AnchorCase) -> Sample:
    img = cfg.image
    diag = img.diagonal
    for _ in range(MAX_RETRIES):
        a = _random_anchor(rng, cfg, case)
        theta_d, r_d, theta_g, r_g = _case_points(rng, a)
        theta_d, r_d = _noisy(rng, cfg, theta_d, r_d)
        theta_g, r_g = _noisy(rng, cfg, theta_g, r_g)
        if r_d <= 0 or r_g <= 0:
            continue
        d = _polar(a.origin, theta_d, r_d * diag)
        g = _polar(a.origin, theta_g, r_g * diag)
        if not (img.contains(d) and img.contains(g)) or d == a.origin or g == a.origin:
            continue
        meta = {
            "surgery_type": _categorical(rng, cfg.surgery_types),
            "surgeon_id": _categorical(rng, cfg.surgeons),
        }
        return Sample(img, d, g, a, meta)
    raise RuntimeError(f"could not place an in-bounds {case.name} sample after {MAX_RETRIES} tries")


def generate(cfg: SynthConfig) -> list[Sample]:
    """Deterministic sample list; sample ``i`` draws from the stream (seed, i)."""
    mix = np.array(cfg.case_mix, dtype=float)
    mix /= mix.sum()
    samples = []
    for i in range(cfg.count):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
        case = AnchorCase(int(rng.choice(3, p=mix)) + 1)
        samples.append(generate_one(cfg, rng, case))
    return samples


def generate_balanced(cfg: SynthConfig, per_case: int) -> list[Sample]:
    """Exactly ``per_case`` samples of each case, ordered case by case."""
    samples = []
    for case in AnchorCase:
        for i in range(per_case):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, int(case), i]))
            samples.append(generate_one(cfg, rng, case))
    return samples


def render(s: Sample) -> np.ndarray:
    """(H, W, 3) uint8 raster, each pixel colored by the region of its center."""
    if s.anchor is None:
        raise ValueError("render needs a sample with an anchor")
    a = check_anchor(s.anchor)
    w, h = int(s.image.width), int(s.image.height)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64) + 0.5
    theta = np.mod(np.arctan2(ys - a.origin.y, xs - a.origin.x), TWO_PI)
    idx = sector_index(theta, a.angles)
    palette = np.array([COLORS[r] for r in Region], dtype=np.uint8)
    out = palette[idx]
    ox = min(int(math.floor(a.origin.x)), w - 1)
    oy = min(int(math.floor(a.origin.y)), h - 1)
    out[oy, ox] = ORIGIN_COLOR
    return out
