"""
Canonical anchor frame
======================

Map points from an image into the canonical frame of an attachment anchor,
encode a grasp radially, and check that the mapping is undone exactly.
"""
import math

from anchorlab.core import AnchorCase, AttachmentAnchor, ImageDims, Point2, region_of
from anchorlab.frame import build_canonicalizer, unwarp_point, warp_point
from anchorlab.graspcodec import decode_grasp, encode_grasp, grid_decode, grid_encode

img = ImageDims(640, 480)

# adhesion ray pointing down-left, mounting rays up-left and right
anchor = AttachmentAnchor(Point2(320, 200), math.radians(110), math.radians(200), math.radians(350),
                          AnchorCase.TRIANGLE)
print("sector widths (deg):", [round(math.degrees(w), 1) for w in anchor.sector_widths])

warp = build_canonicalizer(anchor, img)
for p in (Point2(250, 300), Point2(200, 150), Point2(500, 260)):
    c = warp_point(warp, p)
    back = unwarp_point(warp, c)
    print(f"{region_of(p, anchor).name:5s} ({p.x:.0f}, {p.y:.0f}) -> canonical ({c.x:+.4f}, {c.y:+.4f})"
          f"  round-trip error {back.dist(p):.1e} px")

# radial grasp code: distance as a diagonal fraction, direction relative to the adhesion ray
grasp = Point2(240, 320)
code = encode_grasp(grasp, anchor, img)
print(f"grasp code r_rel={code.r_rel:.4f} angle={math.degrees(code.angle):+.2f} deg")
print("decoded:", decode_grasp(code, anchor, img))

# 7x7 grid code used by keypoint heads
g = grid_encode(grasp, img)
print(f"grid cell {g.cell}, offset ({g.offset[0]:+.3f}, {g.offset[1]:+.3f}) -> {grid_decode(g, img)}")
