"""Sampler and analysis toolkit for stable random planar quadrangulations.

Builds quadrangulations from labelled heavy-tailed plane trees through the
corner-to-successor arc construction, and ships a Monte Carlo harness for
the scaling exponents of distances, ball volumes and vertex degrees.
"""

from .backend import backend_name
from .cvs import (
    QuadMap,
    SuccessorTable,
    ValidationReport,
    build_quadrangulation,
    canonical_form,
    enumerate_small,
    iter_labelled_trees,
    iter_offspring_sequences,
    successor_table,
    validate_quadrangulation,
)
from .gwtree import (
    CornerSequence,
    LabelledTree,
    LukasiewiczExcursion,
    PlaneTree,
    assign_labels,
    contour_exploration,
    cycle_shift_to_excursion,
    height_process,
    sample_conditioned_offspring,
    sample_labelled_tree,
    tree_from_lukasiewicz,
    tree_from_offspring,
)
from .mapmetric import (
    BallProfile,
    ball_profile,
    bfs_distances,
    check_dcirc_dominates,
    check_identity_to_pointed,
    d_circ,
)
from .offspring import OffspringLaw, build_offspring_law
from .scaling import (
    ExperimentConfig,
    RescalingConstants,
    SlopeFit,
    emit_rescaled_paths,
    fit_loglog_slope,
    run_maxdegree_experiment,
    run_radius_experiment,
    run_voltail_experiment,
    run_volume_experiment,
)
from .persist import export_mesh, read_map, read_tree, write_map, write_tree

__version__ = "0.1.0"

__all__ = [
    "BallProfile",
    "CornerSequence",
    "ExperimentConfig",
    "LabelledTree",
    "LukasiewiczExcursion",
    "OffspringLaw",
    "PlaneTree",
    "QuadMap",
    "RescalingConstants",
    "SlopeFit",
    "SuccessorTable",
    "ValidationReport",
    "assign_labels",
    "backend_name",
    "ball_profile",
    "bfs_distances",
    "build_offspring_law",
    "build_quadrangulation",
    "canonical_form",
    "check_dcirc_dominates",
    "check_identity_to_pointed",
    "contour_exploration",
    "cycle_shift_to_excursion",
    "d_circ",
    "emit_rescaled_paths",
    "enumerate_small",
    "export_mesh",
    "fit_loglog_slope",
    "height_process",
    "iter_labelled_trees",
    "iter_offspring_sequences",
    "read_map",
    "read_tree",
    "run_maxdegree_experiment",
    "run_radius_experiment",
    "run_voltail_experiment",
    "run_volume_experiment",
    "sample_conditioned_offspring",
    "sample_labelled_tree",
    "successor_table",
    "tree_from_lukasiewicz",
    "tree_from_offspring",
    "validate_quadrangulation",
    "write_map",
    "write_tree",
    "__version__",
]
