"""Equivariant bifurcation toolkit for the sum-zero permutation representation.

Axes of symmetry, invariant plane charts, the quadratic and cubic
equivariant calculus, branch catalogs with Morse indices, forced symmetry
breaking with closed-form and numerically detected saddle-nodes, generic
continuation, and gradient-flow checks.
"""

from .rep_core import (
    Axis,
    Dims,
    axis_class_counts,
    axis_pair_cosines,
    axis_unit,
    block_unit,
    enumerate_axes,
    ell,
    isotropy_blocks,
    orbit_plane_count,
    permute,
    plane_chart,
    plane_limit,
    sumzero,
)
from .equivariants import (
    CubicParams,
    bilinear_form,
    cubic_invariant,
    cubic_t1,
    cubic_t2,
    phase_field,
    phase_index,
    quad_equivariant,
    t2_axis_eigenvalue,
)
from .family import (
    FamilySpec,
    branch_index,
    branch_point,
    branches_in_box,
    branching_pattern,
    cubic_backward_fold,
    hyperplane_index,
    jacobian_trace,
    kappa,
    model_scales,
    pitchfork_branch,
    poincare_hopf_sum,
    smooth_plateau,
)
from .symbreak import (
    chi,
    enumerate_equilibria,
    expected_count,
    fold_detect,
    fold_lambda_closed,
    fold_point_closed,
    localized_family,
    planar_system,
    planar_zeros,
    predicted_counts,
    transverse_coupling,
    verify_minimal_model,
)
from .continuation import (
    ContinuationSettings,
    Curve,
    FoldEvent,
    HyperplaneSystem,
    classify_curve,
    locate_fold,
    newton_solve,
    trace_branch,
)
from .dynamics import (
    FlowSettings,
    balanced_plane_check,
    connection_check,
    flow,
)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
