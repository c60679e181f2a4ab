"""
Grasp spread under three representations
========================================

Compare the spread of grasp points expressed in image coordinates, relative
to the dissection point, and in the canonical anchor frame, then test whether
the anchor frame is tighter along x.
"""
from anchorlab.core import AnchorCase
from anchorlab.stats import RepresentationKind as RK, paired_deviation_vectors, std_report, t_test_paired_one_sided
from anchorlab.synth import SynthConfig, generate_balanced

samples = generate_balanced(SynthConfig(seed=2024), per_case=500)
report = std_report(samples)

print(f"{'case':8s} {'absolute':>9s} {'relative':>9s} {'anchor':>9s}   one-sided p")
for case in AnchorCase:
    cells = [report.get(kind, case).std_x for kind in (RK.ABSOLUTE, RK.RELATIVE, RK.ANCHOR)]
    group = [s for s in samples if s.case is case]
    a, b = paired_deviation_vectors(group, RK.ANCHOR, RK.RELATIVE, axis=0)
    p = t_test_paired_one_sided(a, b, "less").p
    print(f"{case.name:8s} " + " ".join(f"{v:9.2f}" for v in cells) + f"   {p:.1e}")

# absolute/relative are percent of width/height, anchor is percent of the diagonal
