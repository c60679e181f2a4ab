import math

import numpy as np
import pytest
from hypothesis import strategies as st

from anchorlab.core import AnchorCase, AttachmentAnchor, ImageDims, Point2, Sample, region_of

TWO_PI = 2 * math.pi


def canonical_anchor(origin=(500.0, 500.0), case=AnchorCase.TRIANGLE):
    return AttachmentAnchor(Point2(*origin), math.pi / 2, math.pi, 0.0, case)


def polar(origin: Point2, theta: float, r: float) -> Point2:
    return Point2(origin.x + r * math.cos(theta), origin.y + r * math.sin(theta))


def random_anchor(rng: np.random.Generator, img: ImageDims, min_width=0.05, case=None) -> AttachmentAnchor:
    """Valid anchor with sector widths at least ``min_width``."""
    widths = rng.dirichlet([2.0, 2.0, 2.0]) * (TWO_PI - 3 * min_width) + min_width
    adh = rng.uniform(0, TWO_PI)
    origin = Point2(rng.uniform(0.2, 0.8) * img.width, rng.uniform(0.2, 0.8) * img.height)
    case = case or AnchorCase(int(rng.integers(1, 4)))
    return AttachmentAnchor(origin, adh, adh + widths[0], adh + widths[0] + widths[1], case)


@st.composite
def anchors(draw, min_width=0.05):
    w = [draw(st.floats(min_value=0.2, max_value=5.0)) for _ in range(3)]
    total = sum(w)
    widths = [min_width + (TWO_PI - 3 * min_width) * x / total for x in w]
    adh = draw(st.floats(min_value=0.0, max_value=TWO_PI, exclude_max=True))
    ox = draw(st.floats(min_value=100.0, max_value=900.0))
    oy = draw(st.floats(min_value=100.0, max_value=700.0))
    case = draw(st.sampled_from(list(AnchorCase)))
    return AttachmentAnchor(Point2(ox, oy), adh, adh + widths[0], adh + widths[0] + widths[1], case)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def img1000():
    return ImageDims(1000, 1000)


def make_sample(anchor, grasp, dissection=None, img=ImageDims(1000, 800), **meta):
    dissection = dissection or grasp
    return Sample(img, dissection, grasp, anchor, meta)


def distance_to_rays(xs, ys, a):
    """Pixel-center distance to the nearest anchor ray (rays are half-lines)."""
    dx, dy = xs - a.origin.x, ys - a.origin.y
    best = np.full(xs.shape, np.inf)
    for t in a.angles:
        ux, uy = math.cos(t), math.sin(t)
        along = dx * ux + dy * uy
        perp = np.abs(-dx * uy + dy * ux)
        d = np.where(along > 0, perp, np.hypot(dx, dy))
        best = np.minimum(best, d)
    return best


def region_oracle(a, h, w):
    """Per-pixel region via the scalar region_of (independent of the vectorized renderer)."""
    out = np.full((h, w), -1)
    for j in range(h):
        for i in range(w):
            p = Point2(i + 0.5, j + 0.5)
            if p != a.origin:
                out[j, i] = int(region_of(p, a))
    return out


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
