"""Graph of an increasing function with dense jumps, thickened by eps.

Every jump produces a wedge whose angle is pi minus the slope jump; as jumps get small
the wedges open up towards pi and eventually fall below the angle tolerance.

Run: python demos/jump_integral_wedges.py
"""
import math

import numpy as np

from epsboundary import classify_boundary
from epsboundary.setmodel import gen_jump_integral, jump_integral, jump_integral_terms, jump_slopes

eps, N = 0.5, 8
qs, amps = jump_integral_terms(N)
inv = classify_boundary(gen_jump_integral(N, eps), eps, 9, eps / 64)
P = np.array([[r.point.x, r.point.y] for r in inv.labelled("S1")])
print(" jump q    amplitude  predicted angle  measured")
for q, a in zip(qs, amps):
    g = np.array([q, jump_integral(np.array([q]), qs, amps)[0]])
    k = int(np.argmin(np.hypot(*(P - g).T)))
    lo, hi = jump_slopes(np.array([q]), qs, amps)
    pred = math.pi - (math.atan(hi[0]) - math.atan(lo[0]))
    print(f"{q:8.4f}  {a:9.5f}  {pred:15.10f}  {inv.labelled('S1')[k].angle:.10f}")
