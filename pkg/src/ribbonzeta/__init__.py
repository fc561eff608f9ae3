"""Metric ribbon graphs, graph zeta functions and critical exponents."""

__version__ = "0.1.0"

from .distributions import (EmpiricalDistribution, Histogram, empirical, grid_delta, histogram,
                            kantorovich_bound, wasserstein1)
from .errors import RibbonZetaError
from .geodesics import (GeodesicPath, GraphIntersection, count_geodesics, counting_function,
                        derived_geodesic, derived_s_matrix, enumerate_geodesics, geodesic_representative,
                        ideal_wolpert_edgerule, ideal_wolpert_pairs, intersection_number, intersections,
                        is_simple, s_matrix)
from .graphio import format_graph, parse_graph, read_graph
from .kontsevich import (CellPolytope, SamplePoint, cell_constant, cell_polytope, sample_cell,
                         sample_space, short_geodesic_probability)
from .ribbon import (CellDescriptor, MetricRibbonGraph, RibbonGraph, automorphisms, build_graph,
                     contract_edge, enumerate_trivalent_types, face_lengths, faces, is_isomorphic,
                     rerandomize_cyclic_orders, rose_graph, scale, theta_graph, topological_type)
from .zeta import (CriticalExponent, EdgeMatrix, delta_oracle, delta_polynomial, delta_spectral,
                   delta_batch, edge_matrix, p_gamma, systole, upper_bound_delta, zeta_polynomial)
