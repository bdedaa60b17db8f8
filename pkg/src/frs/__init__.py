"""Fisher-Rao geometry of positive semi-definite matrix-valued measures.

Bures and Gaussian Wasserstein distances, the entropy and Fisher
information on the matrix Fisher-Rao space, their heat flow, and
action-minimizing solvers for geodesics and the entropic (Schrodinger)
regularization.
"""
__version__ = "0.1.0"

from .action import (
    GammaRow,
    Path,
    SolverConfig,
    SolveReport,
    gamma_sweep,
    geodesic_convexity_check,
    interval_actions,
    linear_path,
    path_action,
    path_action_gradient,
    path_fisher,
    path_fisher_gradient,
    solve_geodesic,
    solve_schrodinger,
)
from .bures import GaussianParams, bures_dynamic_sq, bures_sq, gaussian_w2_sq, metric, riesz
from .dynamics import FlowTrace, dissipation_report, heat_flow_exact, heat_flow_integrate
from .exceptions import (
    ConvergenceError,
    DimensionError,
    DomainError,
    EigenSolverError,
    FRSError,
    IntegrationError,
    SingularMatrixError,
)
from .measures import (
    FunctionalValue,
    Grid,
    MatrixMeasure,
    TangentField,
    entropy,
    fisher_info,
    fr_norm_sq,
    grad_fr,
    make_measure,
    project_tangent,
    uniform_identity,
    von_neumann,
)
from .symmat import (
    PSDClass,
    SpectralDecomp,
    classify_psd,
    eig,
    expm,
    frobenius,
    invm,
    logm,
    lyapunov_solve,
    spectral_fn,
    sqrtm,
    sym,
)
