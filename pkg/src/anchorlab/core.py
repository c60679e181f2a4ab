"""Domain types, angle arithmetic and sector membership for attachment anchors.

Angles follow image coordinates: ``atan2(y_down, x_right)`` reduced to
``[0, 2*pi)``, so an increasing angle turns clockwise on screen. An anchor's
three rays partition the plane into three sectors, traversed clockwise:

    Adh  = [theta_adh -> theta_m1)
    Mnt  = [theta_m1  -> theta_m2)
    Diss = [theta_m2  -> theta_adh)

A ray belongs to the sector it starts.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

TWO_PI = 2.0 * math.pi
EPS_SECTOR = 1e-3


class AnchorError(ValueError):
    """Raised when an anchor violates its geometric invariants."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __sub__(self, other: Point2) -> tuple[float, float]:
        return (self.x - other.x, self.y - other.y)

    def dist(self, other: Point2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class ImageDims:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width >= 1 and self.height >= 1):
            raise ValueError(f"image dims must be >= 1, got {self.width}x{self.height}")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, p: Point2) -> bool:
        return 0.0 <= p.x <= self.width and 0.0 <= p.y <= self.height


class AnchorCase(enum.IntEnum):
    STRAND = 1
    TRIANGLE = 2
    PLANE = 3

    @property
    def gate(self) -> int:
        """Index of the responsible prediction head (0, 1 or 2)."""
        return int(self) - 1


class Region(enum.IntEnum):
    ADH = 0
    MNT = 1
    DISS = 2


def reduce_angle(theta: float) -> float:
    """Reduce to ``[0, 2*pi)``."""
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative value can round up to exactly 2*pi
    if r >= TWO_PI:
        r = 0.0
    return r


def cw_span(start: float, end: float) -> float:
    """Clockwise angular distance from ``start`` to ``end``, in ``[0, 2*pi)``."""
    return reduce_angle(end - start)


@dataclass(frozen=True)
class AttachmentAnchor:
    """Mechanical origin plus adhesion and two mounting directions.

    Angles are reduced to ``[0, 2*pi)`` on construction (when finite), so
    adding multiples of ``2*pi`` never changes an anchor.
    """

    origin: Point2
    theta_adh: float
    theta_m1: float
    theta_m2: float
    case: AnchorCase = AnchorCase.TRIANGLE

    def __post_init__(self):
        for name in ("theta_adh", "theta_m1", "theta_m2"):
            v = float(getattr(self, name))
            if math.isfinite(v):
                v = reduce_angle(v)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "case", AnchorCase(self.case))

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.theta_adh, self.theta_m1, self.theta_m2)

    @property
    def sector_widths(self) -> tuple[float, float, float]:
        """Clockwise widths of (Adh, Mnt, Diss)."""
        a, m1, m2 = self.angles
        return (cw_span(a, m1), cw_span(m1, m2), cw_span(m2, a))

    def with_angles(self, theta_adh: float, theta_m1: float, theta_m2: float) -> AttachmentAnchor:
        return AttachmentAnchor(self.origin, theta_adh, theta_m1, theta_m2, self.case)


def validate_anchor(a: AttachmentAnchor, eps_sector: float = EPS_SECTOR) -> list[str]:
    """Return the list of violated invariants; an empty list means valid."""
    if not all(math.isfinite(t) for t in a.angles):
        return ["angles must be finite"]
    violations = []
    widths = a.sector_widths
    if abs(sum(widths) - TWO_PI) > 1e-9:
        violations.append("clockwise order adh->m1->m2 violated")
    for name, w in zip(("Adh", "Mnt", "Diss"), widths):
        if w < eps_sector:
            violations.append(f"sector {name} below eps_sector ({w:.3g} < {eps_sector:g})")
    return violations


def check_anchor(a: AttachmentAnchor, eps_sector: float = EPS_SECTOR) -> AttachmentAnchor:
    violations = validate_anchor(a, eps_sector)
    if violations:
        raise AnchorError("invalid anchor: " + "; ".join(violations))
    return a


def angle_of(p: Point2, origin: Point2) -> float:
    dx, dy = p.x - origin.x, p.y - origin.y
    if dx == 0.0 and dy == 0.0:
        raise ValueError("angle undefined: point coincides with origin")
    return reduce_angle(math.atan2(dy, dx))


def region_of(p: Point2, a: AttachmentAnchor) -> Region:
    theta = angle_of(p, a.origin)
    return Region(int(sector_index(np.array([theta]), a.angles)[0]))


def sector_index(theta: np.ndarray, angles) -> np.ndarray:
    """Vectorized sector lookup: 0=Adh, 1=Mnt, 2=Diss for angles in ``[0, 2*pi)``.

    ``angles`` is an (adh, m1, m2) triple in any cyclic parameterization.
    """
    adh, m1, m2 = (float(t) for t in angles)
    w_adh = cw_span(adh, m1)
    w_mnt = cw_span(m1, m2)
    from_adh = np.mod(theta - adh, TWO_PI)
    from_m1 = np.mod(theta - m1, TWO_PI)
    out = np.full(np.shape(theta), 2, dtype=np.int64)
    out[from_m1 < w_mnt] = 1
    out[from_adh < w_adh] = 0
    return out


@dataclass(frozen=True)
class Sample:
    """One grasping maneuver: image dims, dissection point, grasp point, anchor."""

    image: ImageDims
    dissection: Point2
    grasp: Point2
    anchor: AttachmentAnchor | None = None
    meta: Mapping[str, str] = field(default_factory=dict)
    # unknown top-level keys from a dataset file, preserved on round-trip
    extra: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("dissection", "grasp"):
            p = getattr(self, name)
            if not self.image.contains(p):
                raise ValueError(f"{name} ({p.x}, {p.y}) outside image {self.image.width}x{self.image.height}")
        if self.anchor is not None and not self.image.contains(self.anchor.origin):
            o = self.anchor.origin
            raise ValueError(f"anchor origin ({o.x}, {o.y}) outside image")

    @property
    def case(self) -> AnchorCase | None:
        return None if self.anchor is None else self.anchor.case
