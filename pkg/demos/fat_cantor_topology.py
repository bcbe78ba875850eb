"""Complement components of a fat Cantor set times {0, 1}.

Each removed interval leaves a lens-shaped hole between the two rows. Lenses shrink
towards the left end, where the classifier reports chain-type points. Deep levels have
gaps narrower than the raster step, so the bounded count stops following 2^k - 1.

Run: python demos/fat_cantor_topology.py   (about 45 s)
"""
from epsboundary import chain_evidence, classify_boundary, complement_components
from epsboundary.setmodel import gen_fat_cantor
from epsboundary.topology import CHAIN_LABELS, padded_bbox

eps = 0.5
for k in range(1, 7):
    spec = gen_fat_cantor(k)
    box = padded_bbox(spec, eps)
    counts = [len(complement_components(spec, eps, box, eps / m).bounded) for m in (64, 128)]
    print(f"depth {k}: bounded components at h=eps/64, eps/128: {counts}  (2^k-1 = {2**k - 1})")

spec = gen_fat_cantor(6)
cm = complement_components(spec, eps, padded_bbox(spec, eps), eps / 64)
ev = chain_evidence((0.0, 0.5), cm, radius=0.5)
print("lenses accumulating at (0, 1/2), Hausdorff distances:", ev.hausdorff_seq)

inv = classify_boundary(spec, eps, 9, eps / 64)
print("chain-type records:", {k: inv.counts[k] for k in CHAIN_LABELS})
