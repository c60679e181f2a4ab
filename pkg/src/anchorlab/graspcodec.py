"""Radial grasp codes relative to an anchor, and grid-cell keypoint codes.

A grasp is stored as a relative radius (fraction of the image diagonal) and a
unit direction measured from the adhesion ray, so that

    G = origin + r_rel * diag(image) * rotate(phi_rel, theta_adh)

A grasp lying on the adhesion ray has ``phi_rel == (1, 0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import AnchorCase, AttachmentAnchor, ImageDims, Point2, check_anchor

_RADIUS_SLACK = 1e-12


@dataclass(frozen=True)
class GraspCode:
    phi_rel: tuple[float, float]
    r_rel: float

    def __post_init__(self):
        norm = math.hypot(*self.phi_rel)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"phi_rel must be a unit vector, |phi_rel| = {norm}")
        if not 0.0 <= self.r_rel <= 1.0:
            raise ValueError(f"r_rel must lie in [0, 1], got {self.r_rel}")

    @property
    def angle(self) -> float:
        """Direction relative to the adhesion ray, in ``(-pi, pi]``."""
        return math.atan2(self.phi_rel[1], self.phi_rel[0])

    @classmethod
    def from_angle(cls, angle: float, r_rel: float) -> GraspCode:
        return cls((math.cos(angle), math.sin(angle)), r_rel)


@dataclass(frozen=True)
class GridCode:
    grid_size: int
    cell: tuple[int, int]
    offset: tuple[float, float]
    gate: AnchorCase

    def __post_init__(self):
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")
        if not all(0 <= c < self.grid_size for c in self.cell):
            raise ValueError(f"cell {self.cell} out of range for grid {self.grid_size}")
        if not all(-1.0 <= o <= 1.0 for o in self.offset):
            raise ValueError(f"offset {self.offset} outside [-1, 1]^2")


def _rotate(v: tuple[float, float], angle: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def encode_grasp(G: Point2, a: AttachmentAnchor, img: ImageDims) -> GraspCode:
    check_anchor(a)
    dx, dy = G.x - a.origin.x, G.y - a.origin.y
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise ValueError("grasp coincides with the anchor origin; direction undefined")
    r_rel = r / img.diagonal
    if r_rel > 1.0 + _RADIUS_SLACK:
        raise ValueError(f"grasp is {r_rel:.6g} diagonals from the anchor origin (max 1)")
    phi = _rotate((dx / r, dy / r), -a.theta_adh)
    norm = math.hypot(*phi)
    return GraspCode((phi[0] / norm, phi[1] / norm), min(r_rel, 1.0))


def decode_grasp(code: GraspCode, a: AttachmentAnchor, img: ImageDims) -> Point2:
    check_anchor(a)
    ux, uy = _rotate(code.phi_rel, a.theta_adh)
    scale = code.r_rel * img.diagonal
    return Point2(a.origin.x + scale * ux, a.origin.y + scale * uy)


def grid_encode(p: Point2, img: ImageDims, grid_size: int = 7,
                gate: AnchorCase = AnchorCase.TRIANGLE) -> GridCode:
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    if not img.contains(p):
        raise ValueError(f"point ({p.x}, {p.y}) outside image")
    u = p.x * grid_size / img.width
    v = p.y * grid_size / img.height
    col = min(int(math.floor(u)), grid_size - 1)
    row = min(int(math.floor(v)), grid_size - 1)
    offset = (2.0 * (u - col - 0.5), 2.0 * (v - row - 0.5))
    offset = tuple(min(1.0, max(-1.0, o)) for o in offset)
    return GridCode(grid_size, (col, row), offset, AnchorCase(gate))


def grid_decode(code: GridCode, img: ImageDims) -> Point2:
    col, row = code.cell
    ox, oy = code.offset
    g = code.grid_size
    return Point2((col + 0.5 + ox / 2) / g * img.width, (row + 0.5 + oy / 2) / g * img.height)
