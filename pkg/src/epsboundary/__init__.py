"""Boundaries of planar eps-neighbourhoods and their singularities."""
from .geometry import (ArcKind, CircularArc, GeodesicArc, Point2, UnitDir, arc_contains,
                       geodesic_arc, hausdorff_distance)
from .setmodel import (ApproxSet, ProjectionResult, SetSpec, distance_and_projection,
                       finite_approximating_set, gen_fat_cantor, gen_jump_integral,
                       gen_rectangle_example, load_spec, save_spec)
from .arrangement import (BoundaryArcSet, BoundarySample, boundary_convergence,
                          disk_union_boundary, sample_boundary)
from .analysis import (ContributorSet, ExtremalPair, LocalRep, OutwardArc, alpha_profile,
                       contributors, extremal_pairs, local_rep, outward_arc, tangent_estimate)
from .classify import (Inventory, SingularityRecord, classify_boundary, classify_point,
                       verify_partition)
from .topology import (ChainEvidence, ComplementComponent, chain_evidence, chain_set_diagnostics,
                       complement_components)

__version__ = "0.1.0"
