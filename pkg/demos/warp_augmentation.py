"""
Adhesion-ray warp augmentation
==============================

Rotate only the adhesion ray of a synthetic scene, warp its sector raster
accordingly and confirm that canonical grasp coordinates do not move.
Rasters are written as PPM files next to this script.
"""
from pathlib import Path

from anchorlab.augment import WarpAugmentConfig, apply_warp_augment_raster, augment_samples
from anchorlab.core import ImageDims
from anchorlab.frame import build_canonicalizer, warp_point
from anchorlab.io import write_ppm
from anchorlab.synth import SynthConfig, generate, render

out_dir = Path(__file__).with_name("out")
out_dir.mkdir(exist_ok=True)

samples = generate(SynthConfig(seed=3, count=8, image=ImageDims(320, 240)))
augmented = augment_samples(samples, WarpAugmentConfig(seed=1))

for i, (s, (aug, alpha)) in enumerate(zip(samples, augmented)):
    before = warp_point(build_canonicalizer(s.anchor, s.image), s.grasp)
    after = warp_point(build_canonicalizer(aug.anchor, aug.image), aug.grasp)
    shift = s.grasp.dist(aug.grasp)
    drift = max(abs(before.x - after.x), abs(before.y - after.y))
    print(f"sample {i}: alpha={alpha:+.4f} rad, grasp moved {shift:6.2f} px, canonical drift {drift:.1e}")

# the first scene as images
s, alpha = samples[0], augmented[0][1]
raster = render(s)
_, warped = apply_warp_augment_raster(s, raster, alpha)
write_ppm(out_dir / "scene_before.ppm", raster)
write_ppm(out_dir / "scene_after.ppm", warped)
print("rasters written to", out_dir)
