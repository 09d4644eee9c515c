"""plqkit: piecewise linear-quadratic programs at desk scale.

Models PLQ objectives over polyhedra, computes first/second directional
derivatives, certifies local / strict / strong local optimality through
copositivity on critical cones, tests copositivity by three methods, and
enumerates the finitely many strict local minima and stationary values.
Statistical-estimation objective builders (losses, sparsity surrogates,
piecewise affine models) form the front end.
"""

from ._config import DEFAULT, Config
from .backend import backend_name
from .geometry import (
    ConeHRep,
    LpResult,
    Polyhedron,
    QpResult,
    affine_hull,
    contains,
    dist1,
    eigh_desc,
    faces,
    lp_solve,
    qp_convex_solve,
    tangent_cone,
)
from .plq import (
    BallExample,
    BuildingBlock,
    ElementaryRepresentation,
    PAFunction,
    PiecewiseAffineMap,
    PLQFunction,
    Quadratic,
    ball_example,
    composite_dir2,
    elementary_representation,
    expansion_exactness_check,
    gradient_pa_check,
    pa_maxmin_to_piecewise,
    pa_to_dc,
    plq_dir1,
    plq_dir2,
    plq_eval,
    plq_validate,
    quadratic_split,
)
from .copositivity import (
    CopositivityVerdict,
    SignClassification,
    absvalue_classify,
    absvalue_copositivity,
    copositive_on_cone,
    copositive_one_neg_eig,
    min_quadratic_over_polytope,
    strictly_copositive_on_cone,
)
from .optimality import (
    KKTPoint,
    OptimalityCertificate,
    critical_cone,
    enumerate_stationary_values,
    enumerate_strict_minima,
    plq_local_min,
    plq_strong_min,
    qp_local_min,
    qp_stationary,
    qp_strong_min,
)
from .statmodels import (
    CompositeObjective,
    CompositeStructure,
    Loss,
    PAModel,
    Sparsity,
    assemble_objective,
    composite_conditions,
    convex_pa_certificate,
    loss_eval,
    pa_model_eval,
    sparsity_eval,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
