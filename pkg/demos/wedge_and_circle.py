"""A single disk has a smooth boundary; two overlapping disks meet in two wedges.

Run: python demos/wedge_and_circle.py
"""
import math

from epsboundary import classify_boundary
from epsboundary.setmodel import gen_point_pair, gen_single_point

inv = classify_boundary(gen_single_point(), 1.0, 8, 0.01)
print("circle, eps=1:", {k: v for k, v in inv.counts.items() if v})

# centres (+-1, 0), eps = 1.25: the circles cross at (0, +-0.75)
inv = classify_boundary(gen_point_pair(), 1.25, 8, 1.25 / 64)
for r in inv.labelled("S1"):
    print(f"wedge at ({r.point.x:+.3f}, {r.point.y:+.3f})  angle {r.angle:.10f}"
          f"  acos(0.28) = {math.acos(0.28):.10f}")
