"""Min-max solvers for submodular-concave objectives.

The subset block is handled through the convex continuous extension of the
set function (chain subgradients from value queries only); the concave
block through two-point Gaussian smoothing estimates.  A projected
extragradient loop ties the two together, offline and online, and a
brute-force verification layer checks every gap quantity independently.
"""

__version__ = "0.1.0"

from .geometry import Ball, Box, CappedSimplex, Product, unit_box, unit_interval
from .lovasz import (
    ChainDecomposition,
    decompose,
    expected_rounded_value,
    lovasz_subgradient,
    lovasz_value,
    round_threshold,
    value_and_subgradient,
)
from .problems import (
    make_example_b1,
    make_example_b2,
    make_shifted_b1,
    modular_instance,
    random_submodular_instance,
    separable_instance,
    table_instance,
)
from .rng import Stream
from .segmentation import (
    FrameStream,
    Metrics,
    ShapeSpec,
    edge_weight,
    make_segmentation,
    mask_from_x,
    read_pgm,
    scaled_step,
    segmentation_metrics,
    synth_image,
    synth_stream,
    write_pgm,
)
from .setfn import (
    DomainError,
    EnumerationCapError,
    ProblemConstants,
    QueryCounter,
    SetFunctionInstance,
    as_mask,
    charvec,
    check_submodular_at,
    estimate_constants,
    mask_to_indices,
    set_from_charvec,
)
from .smoothing import OracleConfig, online_oracle, oracle_batch, oracle_once
from .solver import (
    JointState,
    SolverConfig,
    SolveResult,
    Trace,
    assemble_field,
    default_start,
    derive_hyperparameters,
    expected_query_total,
    extragradient_step,
    joint_set,
    queries_per_assembly,
    solve_offline,
    solve_online,
)
from .verify import (
    GapReport,
    SaddleReport,
    best_rounding,
    brute_min_sets,
    brute_saddle_check,
    dtau_gap,
    duality_gap,
    duality_gap_L,
    extension_min_on_grid,
    inner_max_y,
    make_gap_oracle,
    online_gaps,
    path_length,
    restricted_gap,
    restricted_gap_L,
)

__all__ = [name for name in dir() if not name.startswith("_")]
