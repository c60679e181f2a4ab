"""Localization metrics for grasp and anchor predictions.

Distances are normalized by the image size ``sqrt(W * H)``. With the default
divisor of 7 the hit disc of :func:`precision_at` covers ``pi / 49`` (about
6.41%) of the image area for any aspect ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import AttachmentAnchor, ImageDims, Point2


@dataclass(frozen=True)
class PredictionRecord:
    predicted_grasp: Point2
    true_grasp: Point2
    image: ImageDims
    predicted_anchor: AttachmentAnchor | None = None
    true_anchor: AttachmentAnchor | None = None
    clamped: bool = False

    @property
    def error(self) -> float:
        return self.predicted_grasp.dist(self.true_grasp)


def image_size(img: ImageDims) -> float:
    return math.sqrt(img.width * img.height)


def hit_radius(img: ImageDims, radius_divisor: float = 7.0) -> float:
    return image_size(img) / radius_divisor


def _nonempty(records):
    records = list(records)
    if not records:
        raise ValueError("no prediction records")
    return records


def precision_at(records: Sequence[PredictionRecord], radius_divisor: float = 7.0) -> float:
    records = _nonempty(records)
    hits = sum(r.error <= hit_radius(r.image, radius_divisor) for r in records)
    return hits / len(records)


def rmse_percent(records: Sequence[PredictionRecord]) -> float:
    records = _nonempty(records)
    sq = [(r.error / image_size(r.image)) ** 2 for r in records]
    return 100.0 * math.sqrt(math.fsum(sq) / len(sq))


def angular_error(pred: float, true: float) -> float:
    """Smallest absolute difference between two angles, in ``[0, pi]``."""
    d = math.fmod(abs(pred - true), 2 * math.pi)
    return min(d, 2 * math.pi - d)


def angular_rmse(pred_angles: Sequence[float], true_angles: Sequence[float]) -> float:
    if len(pred_angles) != len(true_angles):
        raise ValueError(f"length mismatch: {len(pred_angles)} vs {len(true_angles)}")
    if not pred_angles:
        raise ValueError("no angles")
    sq = [angular_error(p, t) ** 2 for p, t in zip(pred_angles, true_angles)]
    return math.sqrt(math.fsum(sq) / len(sq))


def type_precision(records: Sequence[PredictionRecord]) -> float:
    records = _nonempty(records)
    for i, r in enumerate(records):
        if r.predicted_anchor is None or r.true_anchor is None:
            raise ValueError(f"record {i} is missing an anchor")
    return sum(r.predicted_anchor.case == r.true_anchor.case for r in records) / len(records)
