"""Angle criteria for uniform convergence of products of projections."""

from .angle import AngleTable, angle_table, cos_angle, friedrichs_cos, verify_commutator_bound
from .criteria import (
    CriteriaReport,
    WeightVector,
    averaged_rate,
    cyclic_envelope,
    evaluate_criteria,
    gamma_for_quality,
    product_deviation_bound,
    quasi_periodic_envelope,
    random_envelope,
    random_params,
    solve_gamma,
)
from .engine import (
    IterationTrace,
    Schedule,
    ScheduleSpec,
    energy,
    lln_statistics,
    make_schedule,
    run_averaged,
    run_product,
)
from .family import ProjectorFamily, build_family
from .normed_space import NormCertificate, NormedSpace, Operator, estimate_norm_ascent, operator_norm, vector_norm
from .projector import (
    ConsistencyCertificate,
    PairProjector,
    Projector,
    SubspaceBasis,
    check_full_consistency,
    check_weak_consistency,
    intersect_ranges,
    make_oblique_projector,
    make_orthogonal_projector,
    make_pair_projector,
)

__version__ = "0.1.0"
