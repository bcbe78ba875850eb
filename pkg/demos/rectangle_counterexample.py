"""Two parallel segments whose eps-neighbourhoods touch along a segment.

The point (3, 1/2) has two nearest points in the set but only one outward direction, so a
"two nearest points means a corner" rule would mislabel the whole open segment.

Run: python demos/rectangle_counterexample.py
"""
from epsboundary import classify_boundary, distance_and_projection
from epsboundary.setmodel import gen_rectangle_example

spec = gen_rectangle_example()
proj = distance_and_projection(spec, (3.0, 0.5))
print("distance", proj.distance, "nearest points", [tuple(map(float, p)) for p in proj.argmin])

inv = classify_boundary(spec, 0.5, 8, 0.5 / 64)
on_seg = [r for r in inv.records if abs(r.point.y - 0.5) < 1e-9 and 2 < r.point.x < 3]
print("records on the open segment (2,3) x {1/2}:", len(on_seg))
for r in inv.labelled("S2"):
    print(f"  {r.label} at ({r.point.x}, {r.point.y}) outward {[(u.ux, u.uy) for u in r.xi]}")
print("coincident-arc vertices dropped:", inv.meta["vertices_dropped"])
