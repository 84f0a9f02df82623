"""Depth-based two-sample tests for planar point patterns.

The package compares two spatial point patterns — typically a player's
made and missed basketball shots — with a family of nonparametric
two-sample tests, the flagship being a two-dimensional KS test applied
to pooled polar-coordinate depth pairs.  A gridded inhomogeneous
Poisson simulator, null-calibration and power runners, shot-chart CSV
ingestion, and benchmark-relative grouping round out the pipeline; see
the ``depthks`` command-line tool for the packaged workflows.
"""

__version__ = "0.1.0"

from .classify import GroupResult, PairwiseResult, group_by_benchmark, pairwise_pvalues
from .depth import (
    DepthReference,
    halfspace_depth_1d,
    liu_singh_R,
    mahalanobis_depth,
    pooled_depth_pair,
    pooled_depth_pairs,
    tukey_depth_2d,
)
from .geometry import (
    HALF_COURT,
    DegenerateOriginWarning,
    PointPattern,
    Rect,
    from_polar,
    to_polar,
    to_polar_pattern,
    wrap_angle,
)
from .hyptest import (
    METHODS,
    QuadrantCounts,
    TestResult,
    depth_chi_square_test,
    depth_cm_star,
    depth_ks2d_test,
    depth_ks_star,
    ks2d_pvalue,
    ks2d_two_sample,
    liu_singh_test,
    qks,
    quadrant_counts,
    run_method,
)
from .ppsim import (
    DEMO_EXTENT,
    ExperimentConfig,
    IntensityGrid,
    NoiseSpec,
    builtin_grid,
    demo_intensity_grid,
    jitter_pattern,
    load_grid,
    perturb_grid_half_gaussian,
    perturb_grid_lognormal,
    run_power_experiment,
    run_type1_experiment,
    sample_nhpp,
    save_grid,
    shift_grid,
)
from .shotdata import (
    PlayerShotChart,
    RejectedRow,
    ShotRecord,
    build_charts,
    filter_players,
    format_rejection_report,
    load_shot_csv,
    read_exclusions,
)

__all__ = [
    "__version__",
    # geometry
    "Rect",
    "HALF_COURT",
    "PointPattern",
    "DegenerateOriginWarning",
    "wrap_angle",
    "to_polar",
    "from_polar",
    "to_polar_pattern",
    # depth
    "halfspace_depth_1d",
    "DepthReference",
    "pooled_depth_pair",
    "pooled_depth_pairs",
    "tukey_depth_2d",
    "mahalanobis_depth",
    "liu_singh_R",
    # hyptest
    "METHODS",
    "TestResult",
    "QuadrantCounts",
    "qks",
    "ks2d_pvalue",
    "quadrant_counts",
    "ks2d_two_sample",
    "liu_singh_test",
    "depth_chi_square_test",
    "depth_ks_star",
    "depth_cm_star",
    "depth_ks2d_test",
    "run_method",
    # ppsim
    "IntensityGrid",
    "DEMO_EXTENT",
    "load_grid",
    "save_grid",
    "demo_intensity_grid",
    "builtin_grid",
    "sample_nhpp",
    "jitter_pattern",
    "perturb_grid_half_gaussian",
    "perturb_grid_lognormal",
    "shift_grid",
    "NoiseSpec",
    "ExperimentConfig",
    "run_type1_experiment",
    "run_power_experiment",
    # shotdata
    "ShotRecord",
    "RejectedRow",
    "PlayerShotChart",
    "load_shot_csv",
    "format_rejection_report",
    "build_charts",
    "filter_players",
    "read_exclusions",
    # classify
    "PairwiseResult",
    "GroupResult",
    "pairwise_pvalues",
    "group_by_benchmark",
]
