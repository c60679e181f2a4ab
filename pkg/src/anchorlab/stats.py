"""Point-distribution statistics across representations, and t-tests.

Units: ``ABSOLUTE`` and ``RELATIVE`` coordinates are percent of image width
(x) and height (y); ``ANCHOR`` coordinates are percent of the image diagonal
in the canonical anchor frame.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import AnchorCase, Sample
from .frame import build_canonicalizer, warp_point


class RepresentationKind(enum.Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"
    ANCHOR = "anchor"


UNITS = {
    RepresentationKind.ABSOLUTE: "pct_image_wh",
    RepresentationKind.RELATIVE: "pct_image_wh",
    RepresentationKind.ANCHOR: "pct_diagonal",
}

ROLES = ("grasp", "dissect")


def project(s: Sample, kind: RepresentationKind):
    """Return ``(grasp_xy, dissect_xy or None)`` in percent."""
    w, h = s.image.width, s.image.height
    g, d = s.grasp, s.dissection
    if kind is RepresentationKind.ABSOLUTE:
        return (100 * g.x / w, 100 * g.y / h), (100 * d.x / w, 100 * d.y / h)
    if kind is RepresentationKind.RELATIVE:
        return (100 * (g.x - d.x) / w, 100 * (g.y - d.y) / h), None
    if s.anchor is None:
        raise ValueError("anchor-normalized projection needs an anchor")
    warp = build_canonicalizer(s.anchor, s.image)

    def canon(p):
        if p == s.anchor.origin:
            return (0.0, 0.0)
        c = warp_point(warp, p)
        return (100 * c.x, 100 * c.y)

    return canon(g), canon(d)


@dataclass(frozen=True)
class StdCell:
    kind: RepresentationKind
    case: AnchorCase | None  # None pools every sample
    role: str
    std_x: float
    std_y: float
    n: int

    @property
    def unit(self) -> str:
        return UNITS[self.kind]


@dataclass(frozen=True)
class StdReport:
    cells: tuple[StdCell, ...]

    def get(self, kind: RepresentationKind, case: AnchorCase | None, role: str = "grasp") -> StdCell:
        for c in self.cells:
            if c.kind is kind and c.case == case and c.role == role:
                return c
        raise KeyError((kind, case, role))

    def __contains__(self, key) -> bool:
        try:
            self.get(*key)
        except KeyError:
            return False
        return True


def _case_key(case):
    return -1 if case is None else int(case)


def std_report(samples: Sequence[Sample], kinds: Iterable[RepresentationKind] = tuple(RepresentationKind)) -> StdReport:
    """Sample std (n-1) per axis for every (kind, case, role) cell.

    Absolute and relative kinds also get a pooled cell (``case=None``), as in
    a cross-case summary; anchor-normalized cells are per case only.
    Relative dissection cells do not exist.
    """
    cells = []
    for kind in kinds:
        groups: dict = defaultdict(lambda: {"grasp": [], "dissect": []})
        for s in samples:
            if kind is RepresentationKind.ANCHOR and s.anchor is None:
                continue
            g, d = project(s, kind)
            keys = [s.case] if kind is RepresentationKind.ANCHOR else [None] + ([s.case] if s.case else [])
            for key in keys:
                groups[key]["grasp"].append(g)
                if d is not None:
                    groups[key]["dissect"].append(d)
        for case in sorted(groups, key=_case_key):
            for role in ROLES:
                pts = groups[case][role]
                if not pts:
                    continue
                if len(pts) < 2:
                    label = "all" if case is None else case.name
                    raise ValueError(f"insufficient samples for {kind.value}/{label}/{role}: need >= 2, got {len(pts)}")
                arr = np.array(pts)
                std_x, std_y = arr.std(axis=0, ddof=1)
                cells.append(StdCell(kind, case, role, float(std_x), float(std_y), len(pts)))
    return StdReport(tuple(cells))


# --- Student t distribution -------------------------------------------------

_CF_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 10_000


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * betainc_reg(df / 2.0, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


class TTestResult(NamedTuple):
    t: float
    df: float
    p: float


def _p_value(t: float, df: float, alternative: str) -> float:
    if alternative == "less":
        return student_t_cdf(t, df)
    if alternative == "greater":
        return student_t_cdf(-t, df)
    if alternative == "two-sided":
        return min(1.0, 2.0 * student_t_cdf(-abs(t), df))
    raise ValueError(f"alternative must be 'less', 'greater' or 'two-sided', got {alternative!r}")


def t_test_paired_one_sided(a: Sequence[float], b: Sequence[float], alternative: str = "less") -> TTestResult:
    """Paired t-test on ``d = a - b``; ``alternative="less"`` tests mean(a) < mean(b)."""
    if alternative not in ("less", "greater"):
        raise ValueError("one-sided test needs alternative 'less' or 'greater'")
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired samples need equal 1-D lengths, got {a.shape} and {b.shape}")
    n = a.size
    if n < 2:
        raise ValueError("paired t-test needs n >= 2")
    d = a - b
    sd = d.std(ddof=1)
    if sd == 0:
        raise ValueError("zero variance in paired differences")
    t = float(d.mean() / (sd / math.sqrt(n)))
    df = n - 1
    return TTestResult(t, float(df), _p_value(t, df, alternative))


def t_test_welch_unpaired(a: Sequence[float], b: Sequence[float], alternative: str = "two-sided") -> TTestResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite df."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise ValueError("Welch test needs at least two values per group")
    va, vb = a.var(ddof=1) / na, b.var(ddof=1) / nb
    se2 = va + vb
    if se2 == 0:
        raise ValueError("degenerate variance: both groups are constant")
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    df = se2 * se2 / (va * va / (na - 1) + vb * vb / (nb - 1))
    return TTestResult(t, float(df), _p_value(t, df, alternative))


def paired_deviation_vectors(samples: Sequence[Sample], kind_a: RepresentationKind,
                             kind_b: RepresentationKind, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample |grasp coordinate - cell mean| along ``axis`` under two kinds.

    Cells are anchor cases (samples without an anchor pool into one cell).
    """
    if len(samples) < 2:
        raise ValueError("need at least two samples")

    def deviations(kind):
        vals = np.array([project(s, kind)[0][axis] for s in samples])
        cases = [s.case for s in samples]
        out = np.empty_like(vals)
        for case in set(cases):
            mask = np.array([c == case for c in cases])
            out[mask] = np.abs(vals[mask] - vals[mask].mean())
        return out

    a = deviations(kind_a)
    b = a.copy() if kind_b is kind_a else deviations(kind_b)
    return a, b
