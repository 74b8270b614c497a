"""Smooth reconstruction from sparse samples by forcing computed derivatives
to be gradually varied (continuous) before Taylor recombination."""

from .errors import ReconstructionError
from .finite_diff import (Sequence1D, cos_aliasing_report, forward_difference, kth_difference,
                          oscillation_report)
from .graph import DomainGraph, build_grid, distance_field, graph_distance, skeleton_of
from .gvf import (LevelChain, SampleSet, ScalarField, dequantize, gvf_approximate, gvf_extend,
                  gvf_feasible, quantize)
from .lipschitz import (LipschitzBudget, MetricSamples, lipschitz_derivative_chain,
                        mcshane_extend, method_c, min_lipschitz_constant, reconstruct_via_lipschitz)
from .mesh import (TriMesh, method_b, face_normal, force_gvd_on_mesh, implicit_unit_normal,
                   nearest_neighbors, normal_to_partials, pl_interpolate_derivatives,
                   quadratic_fit, vertex_normals)
from .taylor import (DerivativeField, ReconstructionConfig, gvd_iterate, method_a, reconstruct_smooth,
                     taylor_eval_1d, taylor_eval_2d)

__version__ = "0.1.0"
