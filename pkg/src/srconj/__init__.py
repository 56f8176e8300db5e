"""Conjugate times along sub-Riemannian geodesics.

Computes first conjugate times through the canonical Jacobi system and the
limit-initial-condition matrix Riccati flow, classifies finiteness for the
constant-curvature LQ comparison models, verifies the sectional and
averaged comparison inequalities, and covers 3D unimodular Lie groups with
exact closed-form anchors.
"""

from .comparison import (
    ComparisonReport,
    CurvatureBoundSpec,
    bonnet_myers_diameter,
    ricci_bound,
    sectional_bound,
    verify_comparison,
)
from .fields import CurvatureField
from .jacobi import (
    CERTIFIED_INFINITE,
    FINITE,
    NONE_UP_TO_HORIZON,
    ConjugateTimeResult,
    JacobiTrajectory,
    first_conjugate_time,
    integrate_jacobi,
)
from .kernel import backend_name
from .lie3d import (
    ContactStructure3D,
    CovectorState,
    FlowTrajectory,
    StructureConstants3D,
    chi0_conjugate_time,
    conjugate_time_3d,
    covector_from_energy,
    curvature_along,
    e_form_ricci,
    ebar,
    extremal_flow,
    invariants_from_constants,
    ricci_bounds_egrande,
)
from .lq import (
    DiagonalRowModel,
    LQModel,
    classify_finiteness,
    classify_finiteness_l2,
    closed_form_tc,
    finiteness_polynomial,
    hamiltonian_spectrum,
    lq_conjugate_time,
)
from .riccati import (
    RiccatiSolution,
    integrate_riccati_limit_ic,
    matrix_cauchy_schwarz_gap,
    riccati_comparison_check,
    riccati_monotonicity_check,
)
from .tolerances import Tolerances
from .young import (
    StructuralMatrices,
    YoungDiagram,
    build_structural_matrices,
    levels_and_superboxes,
    partial_trace_ricci,
)

__version__ = "0.1.0"

__all__ = [
    "YoungDiagram", "StructuralMatrices", "build_structural_matrices",
    "levels_and_superboxes", "partial_trace_ricci",
    "CurvatureField", "Tolerances",
    "JacobiTrajectory", "ConjugateTimeResult", "integrate_jacobi",
    "first_conjugate_time", "FINITE", "NONE_UP_TO_HORIZON",
    "CERTIFIED_INFINITE",
    "RiccatiSolution", "integrate_riccati_limit_ic",
    "riccati_comparison_check", "riccati_monotonicity_check",
    "matrix_cauchy_schwarz_gap",
    "LQModel", "DiagonalRowModel", "lq_conjugate_time",
    "classify_finiteness", "classify_finiteness_l2", "closed_form_tc",
    "finiteness_polynomial", "hamiltonian_spectrum",
    "CurvatureBoundSpec", "ComparisonReport", "sectional_bound",
    "ricci_bound", "bonnet_myers_diameter", "verify_comparison",
    "ContactStructure3D", "StructureConstants3D", "CovectorState",
    "invariants_from_constants", "covector_from_energy", "extremal_flow",
    "FlowTrajectory", "curvature_along", "e_form_ricci",
    "conjugate_time_3d", "chi0_conjugate_time", "ricci_bounds_egrande",
    "ebar", "backend_name",
]
