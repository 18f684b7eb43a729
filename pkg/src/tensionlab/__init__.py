"""Chart-level tension fields of distributions on Riemannian manifolds.

The package evaluates metric and field expressions through second-order
forward-mode jets, assembles the Levi-Civita connection and curvature on a
chart, computes horizontal and vertical tension fields of a distribution,
and verifies the conformal-deformation laws relating the tension fields of
g and e^{2 mu} g.  See the README for the CLI and the scene file format.
"""

from .checks import CheckResult, CheckUsageError, run_verify
from .conformal import (
    ConformalScene,
    conformal_metric,
    conformal_scene,
    frame_coefficient_check,
    mixed_projection_trace,
    predicted_connection,
    predicted_curvature,
    predicted_tau_h,
    predicted_tau_h_halfdim,
    predicted_tau_v,
)
from .exprlang import Ast, EvalDomainError, ExprSyntaxError, ScalarField, evaluate, parse, to_source
from .geometry import (
    Distribution,
    Frame,
    GeometryCache,
    GeometryError,
    MetricField,
    VectorFieldSpec,
    adapted_frame,
    christoffel,
    covariant_derivative,
    curvature_apply,
    grad_scalar,
    hess_operator,
    laplacian,
    laplacian_along,
    metric_at,
    project,
)
from .jets import Jet2, JetDomainError, jet_apply, jet_seed
from .radial import (
    RadialSolution,
    SingularBranchError,
    closed_form_f,
    integrate_radial,
    mu_family,
    mu_family_field,
    ode_residual,
    radial_solution,
)
from .scenes import Lcg, Scene, SceneError, builtin, builtin_names, load, sample_points, scene_to_dict
from .tension import (
    TensionReport,
    mean_curvatures,
    ricci_along,
    second_fundamental,
    tau_h,
    tau_v,
    tension_report,
    w_reflect,
)

__version__ = "0.1.0"
