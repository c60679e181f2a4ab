"""Adhesion-vector warp augmentation.

The adhesion ray is rotated by ``alpha ~ U[-alpha_max, alpha_max]`` while the
mounting rays stay fixed. Annotations (and optionally a raster) follow the
angular warp from the old anchor to the new one, so only the Adh and Diss
sectors move; the Mnt sector is untouched. Positive ``alpha`` turns clockwise
on screen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import EPS_SECTOR, AnchorError, AttachmentAnchor, Sample, check_anchor
from .frame import AngularWarp, map_point, warp_raster

DEFAULT_ALPHA_MAX = math.pi / 18
MAX_ATTEMPTS = 100


class AugmentError(ValueError):
    pass


@dataclass(frozen=True)
class WarpAugmentConfig:
    alpha_max: float = DEFAULT_ALPHA_MAX
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.alpha_max) and self.alpha_max >= 0):
            raise ValueError(f"alpha_max must be finite and >= 0, got {self.alpha_max}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def admissible_for(self, a: AttachmentAnchor, eps_sector: float = EPS_SECTOR) -> bool:
        """Whether every draw keeps both sectors next to the adhesion ray open."""
        w_adh, _, w_diss = a.sector_widths
        return self.alpha_max < min(w_adh, w_diss) - eps_sector


def sample_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Independent stream for draw ``index`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def sample_alpha(cfg: WarpAugmentConfig, rng: np.random.Generator) -> float:
    if cfg.alpha_max == 0:
        return 0.0
    return float(rng.uniform(-cfg.alpha_max, cfg.alpha_max))


def sample_alphas(cfg: WarpAugmentConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    if cfg.alpha_max == 0:
        return np.zeros(n)
    return rng.uniform(-cfg.alpha_max, cfg.alpha_max, size=n)


def adhesion_warp(a: AttachmentAnchor, alpha: float) -> tuple[AttachmentAnchor, AngularWarp]:
    """New anchor with the adhesion ray rotated by ``alpha`` and the warp onto it."""
    check_anchor(a)
    new = a.with_angles(a.theta_adh + alpha, a.theta_m1, a.theta_m2)
    try:
        check_anchor(new)
    except AnchorError as exc:
        raise AugmentError(f"alpha={alpha:.6g} collapses a sector next to the adhesion ray") from exc
    # a rotation past a neighbouring ray can wrap into another valid ordering
    old_w, new_w = a.sector_widths, new.sector_widths
    if abs((new_w[0] - old_w[0]) + alpha) > 1e-9:
        raise AugmentError(f"alpha={alpha:.6g} rotates the adhesion ray past a mounting ray")
    return new, AngularWarp(a.origin, a.angles, new.angles, 1.0)


def apply_warp_augment(s: Sample, alpha: float) -> Sample:
    if s.anchor is None:
        raise AugmentError("sample has no anchor")
    if alpha == 0:
        return s
    new_anchor, w = adhesion_warp(s.anchor, alpha)
    d = map_point(w, s.dissection)
    g = map_point(w, s.grasp)
    try:
        return replace(s, anchor=new_anchor, dissection=d, grasp=g)
    except ValueError as exc:
        raise AugmentError(f"warped annotation leaves the image: {exc}") from exc


def apply_warp_augment_raster(s: Sample, raster: np.ndarray, alpha: float) -> tuple[Sample, np.ndarray]:
    raster = np.asarray(raster)
    if raster.ndim != 3 or raster.shape[0] == 0 or raster.shape[1] == 0:
        raise AugmentError("raster must be a non-empty (H, W, C) array")
    if raster.shape[:2] != (int(s.image.height), int(s.image.width)):
        raise AugmentError(f"raster shape {raster.shape[:2]} does not match image {s.image}")
    out = apply_warp_augment(s, alpha)
    if alpha == 0:
        return out, raster.copy()
    _, w = adhesion_warp(s.anchor, alpha)
    return out, warp_raster(w, raster, s.image)


def augment_sample(s: Sample, cfg: WarpAugmentConfig, rng: np.random.Generator) -> tuple[Sample, float]:
    """Draw alphas until the warp is admissible; returns the sample and the alpha used."""
    for _ in range(MAX_ATTEMPTS):
        alpha = sample_alpha(cfg, rng)
        try:
            return apply_warp_augment(s, alpha), alpha
        except AugmentError:
            continue
    raise AugmentError(f"no admissible alpha after {MAX_ATTEMPTS} attempts")


def augment_samples(samples, cfg: WarpAugmentConfig) -> list[tuple[Sample, float]]:
    """One augmented copy per sample, each drawn from the stream (seed, index)."""
    return [augment_sample(s, cfg, sample_rng(cfg.seed, i)) for i, s in enumerate(samples)]
