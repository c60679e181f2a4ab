"""Reproducible evaluation splits and run aggregation."""
from __future__ import annotations

import enum
import hashlib
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .core import Sample


class SplitKind(enum.Enum):
    KFOLD = "kfold"
    GROUP_HOLDOUT = "group_holdout"


@dataclass(frozen=True)
class SplitPlan:
    """Assignment of every sample to a fold or group label.

    ``held_out`` lists the labels evaluated in turn: every fold for k-fold
    plans, a single group for group-holdout plans.
    """

    kind: SplitKind
    assignments: tuple
    seed: int = 0
    held_out: tuple = ()
    meta_key: str | None = None

    def splits(self) -> Iterator[tuple[object, np.ndarray, np.ndarray]]:
        """Yield ``(label, train_indices, test_indices)`` for each held-out label."""
        labels = np.array(self.assignments, dtype=object)
        for label in self.held_out:
            test = labels == label
            yield label, np.flatnonzero(~test), np.flatnonzero(test)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "seed": self.seed,
            "meta_key": self.meta_key,
            "held_out": list(self.held_out),
            "assignments": list(self.assignments),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> SplitPlan:
        return cls(SplitKind(d["kind"]), tuple(d["assignments"]), int(d["seed"]),
                   tuple(d["held_out"]), d.get("meta_key"))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def stratified_kfold(samples: Sequence[Sample], k: int, seed: int = 0) -> SplitPlan:
    """Shuffle each anchor-case stratum, then deal round-robin across folds.

    The deal continues where the previous stratum stopped, which keeps total
    fold sizes within one sample of each other.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    strata: dict = defaultdict(list)
    for i, s in enumerate(samples):
        strata[s.case].append(i)
    for case, idx in strata.items():
        if len(idx) < k:
            label = "no anchor" if case is None else case.name
            raise ValueError(f"stratum {label} has {len(idx)} samples, fewer than k={k}")
    rng = np.random.default_rng(seed)
    folds = [0] * len(samples)
    pos = 0
    for case in sorted(strata, key=lambda c: -1 if c is None else int(c)):
        idx = np.array(strata[case])
        rng.shuffle(idx)
        for i in idx:
            folds[int(i)] = pos % k
            pos += 1
    return SplitPlan(SplitKind.KFOLD, tuple(folds), seed, tuple(range(k)))


def _meta_values(samples: Sequence[Sample], meta_key: str) -> list[str]:
    values = []
    for i, s in enumerate(samples):
        if meta_key not in s.meta:
            raise KeyError(f"sample {i} has no meta key {meta_key!r}")
        values.append(str(s.meta[meta_key]))
    return values


def group_holdout(samples: Sequence[Sample], meta_key: str,
                  groups: Mapping[str, str] | None = None) -> list[SplitPlan]:
    """One plan per group, holding that group out entirely.

    ``groups`` optionally maps raw meta values onto group labels (see
    :func:`group_surgeons`).
    """
    values = _meta_values(samples, meta_key)
    labels = [groups[v] if groups is not None else v for v in values]
    distinct = sorted(set(labels))
    if len(distinct) < 2:
        raise ValueError(f"group holdout on {meta_key!r} needs at least two groups, found {distinct}")
    return [SplitPlan(SplitKind.GROUP_HOLDOUT, tuple(labels), 0, (g,), meta_key) for g in distinct]


@dataclass(frozen=True)
class SurgeonGroups:
    groups: dict[str, str]
    members: tuple[tuple[str, ...], ...]
    degenerate: bool = False


def group_counts(counts: Mapping[str, int], min_fraction: float = 0.15) -> SurgeonGroups:
    """Greedy grouping so that every group holds at least ``min_fraction`` of all samples.

    Surgeons are visited by descending count (ties by id). A surgeon that
    reaches the threshold alone forms its own group; the rest are packed in
    order, closing a group once it reaches the threshold. A trailing
    underweight group merges into the previous group.
    """
    if not counts:
        raise ValueError("no surgeons")
    total = sum(counts.values())
    threshold = min_fraction * total
    order = sorted(counts, key=lambda s: (-counts[s], s))
    members: list[list[str]] = []
    current: list[str] = []
    current_n = 0
    for sid in order:
        if not current and counts[sid] >= threshold:
            members.append([sid])
            continue
        current.append(sid)
        current_n += counts[sid]
        if current_n >= threshold:
            members.append(current)
            current, current_n = [], 0
    degenerate = False
    if current:
        if members:
            members[-1].extend(current)
        else:
            members.append(current)
            degenerate = True
    mapping = {}
    for group in members:
        label = ",".join(group)
        for sid in group:
            mapping[sid] = label
    return SurgeonGroups(mapping, tuple(tuple(g) for g in members), degenerate)


def group_surgeons(samples: Sequence[Sample], min_fraction: float = 0.15) -> SurgeonGroups:
    counts: dict[str, int] = defaultdict(int)
    for sid in _meta_values(samples, "surgeon_id"):
        counts[sid] += 1
    return group_counts(counts, min_fraction)


@dataclass(frozen=True)
class RunSummary:
    metric: str
    values: tuple[float, ...]
    mean: float
    std: float
    n_runs: int
    single_run: bool = False
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)


def aggregate_runs(values: Sequence[float], metric: str = "", **meta) -> RunSummary:
    values = tuple(float(v) for v in values)
    if not values:
        raise ValueError("no runs to aggregate")
    n = len(values)
    mean = math.fsum(values) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1)) if n > 1 else 0.0
    return RunSummary(metric, values, mean, std, n, single_run=n == 1, meta=meta)
