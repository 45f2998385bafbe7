"""Numerical laboratory for the grand-canonical hard sphere model.

Exact identities of the model (free-volume, monotonicity, the externally
uncovered set, the partition-function inequalities) verified by Monte
Carlo at desk scale, next to the Lambert-W bound calculus that turns them
into closed-form packing-density, pressure, and entropy lower bounds.
"""

from .geometry import (
    BallSpec,
    ball_volume,
    containing_ball_bound,
    sample_uniform_ball,
    two_ball_intersection_volume,
    unit_ball_radius,
)
from .model import (
    BallRegion,
    BallVolumeRegion,
    Configuration,
    IntervalRegion,
    OracleRegion,
    PackingEvent,
    Region,
    ShellRegion,
    insertion_allowed,
    is_packing,
    region_volume_mc,
)
from .partition import (
    PartitionEstimate,
    SeriesTruncationError,
    canonical_zhat_mc,
    entropy_density_estimate,
    grand_z_series,
    tonks_zhat_exact,
)
from .sampler import (
    ChainState,
    FugacityParams,
    Schedule,
    chain_rng,
    default_schedule,
    estimate_alpha,
    estimate_count_variance,
    estimate_free_volume,
    gcmc_step,
    make_chain,
    run_chain,
)
from .stats import Estimate, batch_means, merge_estimates
from .uncovered import (
    UncoveredRegion,
    check_geometric_lemma,
    draw_uncovered_sets,
    estimate_evol_T,
    sample_uncovered,
    verify_identity_31,
    verify_inequality_32,
)
from .bounds import (
    BoundCurve,
    asymptotic_alpha,
    cell_model_bound,
    entropy_bound,
    general_c_bound,
    lambert_w0,
    pressure_bound,
    theorem1_bound,
    theorem1_bound_monotone,
)

__version__ = "0.1.0"
