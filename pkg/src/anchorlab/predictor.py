"""Mean-based grasp predictors ``(image, dissection[, anchor]) -> grasp``.

Two baselines ignore the anchor: the mean absolute grasp position and the mean
grasp-minus-dissection offset. The anchor-conditioned kinds take the
ground-truth anchor as input and keep per-case statistics either in the
canonical anchor frame or as a radial code (relative radius plus circular mean
of the direction relative to the adhesion ray).
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .core import AnchorCase, ImageDims, Point2, Sample
from .evalproto import RunSummary, SplitPlan, aggregate_runs
from .frame import CanonicalPoint, build_canonicalizer, unwarp_point, warp_point
from .graspcodec import GraspCode, decode_grasp, encode_grasp
from .metrics import PredictionRecord, precision_at, rmse_percent

_MIN_RESULTANT = 1e-9


class PredictorKind(enum.Enum):
    ABSOLUTE_MEAN = "absolute-mean"
    RELATIVE_MEAN = "relative-mean"
    ANCHOR_CANONICAL_MEAN = "anchor-canonical-mean"
    ANCHOR_RADIAL = "anchor-radial"

    @property
    def needs_anchor(self) -> bool:
        return self in (PredictorKind.ANCHOR_CANONICAL_MEAN, PredictorKind.ANCHOR_RADIAL)


@dataclass(frozen=True)
class PredictorModel:
    """Fitted parameters.

    ``params`` holds ``(x, y)`` in percent for the baselines, and maps each
    case to ``(x, y)`` canonical diagonal fractions or ``(r_rel, angle)`` for
    the anchor kinds.
    """

    kind: PredictorKind
    params: object
    n_train: int = 0

    def to_dict(self) -> dict:
        if self.kind.needs_anchor:
            params = {str(int(c)): list(v) for c, v in sorted(self.params.items())}
        else:
            params = list(self.params)
        return {"kind": self.kind.value, "n_train": self.n_train, "params": params}

    @classmethod
    def from_dict(cls, d: Mapping) -> PredictorModel:
        kind = PredictorKind(d["kind"])
        if kind.needs_anchor:
            params = {AnchorCase(int(c)): tuple(v) for c, v in d["params"].items()}
        else:
            params = tuple(d["params"])
        return cls(kind, params, int(d.get("n_train", 0)))


def circular_mean(angles: Sequence[float]) -> float:
    c = math.fsum(math.cos(a) for a in angles)
    s = math.fsum(math.sin(a) for a in angles)
    if math.hypot(c, s) < _MIN_RESULTANT:
        raise ValueError("circular mean undefined: resultant vector vanishes")
    return math.atan2(s, c)


def _mean2(points) -> tuple[float, float]:
    xs, ys = zip(*points)
    return (math.fsum(xs) / len(xs), math.fsum(ys) / len(ys))


def fit(kind: PredictorKind | str, samples: Sequence[Sample]) -> PredictorModel:
    kind = PredictorKind(kind)
    if not samples:
        raise ValueError("empty training set")
    if kind is PredictorKind.ABSOLUTE_MEAN:
        params = _mean2([(100 * s.grasp.x / s.image.width, 100 * s.grasp.y / s.image.height) for s in samples])
        return PredictorModel(kind, params, len(samples))
    if kind is PredictorKind.RELATIVE_MEAN:
        params = _mean2([(100 * (s.grasp.x - s.dissection.x) / s.image.width,
                          100 * (s.grasp.y - s.dissection.y) / s.image.height) for s in samples])
        return PredictorModel(kind, params, len(samples))

    by_case: dict = defaultdict(list)
    for i, s in enumerate(samples):
        if s.anchor is None:
            raise ValueError(f"training sample {i} has no anchor")
        by_case[s.case].append(s)
    params = {}
    for case, group in sorted(by_case.items()):
        if kind is PredictorKind.ANCHOR_CANONICAL_MEAN:
            pts = []
            for s in group:
                c = warp_point(build_canonicalizer(s.anchor, s.image), s.grasp)
                pts.append((c.x, c.y))
            params[case] = _mean2(pts)
        else:
            codes = [encode_grasp(s.grasp, s.anchor, s.image) for s in group]
            r_mean = math.fsum(c.r_rel for c in codes) / len(codes)
            params[case] = (r_mean, circular_mean([c.angle for c in codes]))
    return PredictorModel(kind, params, len(samples))


def clamp_to_image(p: Point2, img: ImageDims) -> tuple[Point2, bool]:
    x = min(max(p.x, 0.0), float(img.width))
    y = min(max(p.y, 0.0), float(img.height))
    return Point2(x, y), (x != p.x or y != p.y)


def predict_raw(model: PredictorModel, s: Sample) -> Point2:
    """Prediction before clamping to the image; the grasp field of ``s`` is ignored."""
    img = s.image
    kind = model.kind
    if kind is PredictorKind.ABSOLUTE_MEAN:
        x, y = model.params
        return Point2(x / 100 * img.width, y / 100 * img.height)
    if kind is PredictorKind.RELATIVE_MEAN:
        x, y = model.params
        return Point2(s.dissection.x + x / 100 * img.width, s.dissection.y + y / 100 * img.height)
    if s.anchor is None:
        raise ValueError(f"{kind.value} needs an anchor at predict time")
    if s.case not in model.params:
        raise KeyError(f"unfitted case {s.case.name}")
    a, b = model.params[s.case]
    if kind is PredictorKind.ANCHOR_CANONICAL_MEAN:
        if a == 0.0 and b == 0.0:
            return s.anchor.origin
        return unwarp_point(build_canonicalizer(s.anchor, img), CanonicalPoint(a, b))
    return decode_grasp(GraspCode.from_angle(b, min(max(a, 0.0), 1.0)), s.anchor, img)


def predict(model: PredictorModel, s: Sample) -> Point2:
    return clamp_to_image(predict_raw(model, s), s.image)[0]


def predict_record(model: PredictorModel, s: Sample) -> PredictionRecord:
    p, clamped = clamp_to_image(predict_raw(model, s), s.image)
    return PredictionRecord(p, s.grasp, s.image, None, s.anchor, clamped)


@dataclass(frozen=True)
class Evaluation:
    precision: RunSummary
    rmse: RunSummary
    records: dict = field(default_factory=dict, compare=False)

    @property
    def summaries(self) -> dict[str, RunSummary]:
        return {"precision@6%": self.precision, "rmse_pct": self.rmse}


def evaluate(kind: PredictorKind | str, samples: Sequence[Sample], plan: SplitPlan) -> Evaluation:
    """Fit on each training part of ``plan``, score on the held-out part."""
    if len(plan.assignments) != len(samples):
        raise ValueError(f"plan covers {len(plan.assignments)} samples, dataset has {len(samples)}")
    kind = PredictorKind(kind)
    precisions, rmses, records = [], [], {}
    for label, train_idx, test_idx in plan.splits():
        model = fit(kind, [samples[i] for i in train_idx])
        recs = [predict_record(model, samples[i]) for i in test_idx]
        records[label] = recs
        precisions.append(precision_at(recs))
        rmses.append(rmse_percent(recs))
    meta = {"plan": plan.digest(), "seed": plan.seed, "held_out": list(plan.held_out)}
    return Evaluation(aggregate_runs(precisions, "precision@6%", **meta),
                      aggregate_runs(rmses, "rmse_pct", **meta), records)


def evaluate_runs(kind, samples, plans: Sequence[SplitPlan]) -> tuple[RunSummary, RunSummary]:
    """One run per plan; each run contributes its mean over folds."""
    evals = [evaluate(kind, samples, p) for p in plans]
    seeds = [p.seed for p in plans]
    return (aggregate_runs([e.precision.mean for e in evals], "precision@6%", seeds=seeds),
            aggregate_runs([e.rmse.mean for e in evals], "rmse_pct", seeds=seeds))

