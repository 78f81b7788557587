"""Graph systems and step graphon systems.

Rainbow homomorphism densities, admissibility, cut norms and distances,
W-random sampling, weak regularity partitions, rainbow subgraph search,
and the extremal pipeline computing rainbow Turan densities of trees.
"""

__version__ = "0.1.0"

from .combinatorics import (
    Multigraph,
    PreColoring,
    chromatic_number,
    enumerate_rainbow_extensions,
    find_leaf_stars,
    multigraph_from_json,
    multigraph_from_pairs,
    multigraph_to_json,
    parallel_edges,
    path_graph,
    simplify,
    split_tree_at_edge,
    star_graph,
)
from .cutnorm import (
    cut_norm_exact,
    cut_norm_heuristic,
    d_box,
    d_box_bounds,
    delta_box_bounds,
    delta_box_lower,
    delta_box_upper,
)
from .density import (
    DensityRequest,
    colored_density,
    count_rainbow_copies,
    degree_profile,
    edge_density,
    gamma,
    induced_density,
    rainbow_density,
    rooted_density,
)
from .errors import ScaleGuardError, ValidationError
from .extremal import (
    MinQuadraticProgram,
    ZeroStructure,
    enumerate_zero_structures,
    export_program,
    is_zero_structure,
    optimize_min_density,
    pi_star_tree,
)
from .graphon import (
    GraphSystem,
    OverlineSystem,
    StepGraphonSystem,
    common_refinement,
    from_graph_system,
    is_admissible,
    is_classical,
    moebius_overline,
    span,
    stepping,
    subdivide,
)
from .regularity import equitable_refine, weak_regularity_bound, weak_regularity_partition
from .sampling import (
    WeightedGraphSystem,
    convergence_trace,
    sample_graph_system,
    sample_system,
    sample_weighted,
)
from .search import (
    construction_bipartite,
    construction_lemma72,
    construction_thm14,
    exact_extremal_number,
    find_rainbow_copy,
)
