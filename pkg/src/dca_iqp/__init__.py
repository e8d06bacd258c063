"""Indefinite quadratic programming over polyhedra by DC decomposition.

The objective ``0.5 x'Qx + q'x`` with symmetric indefinite ``Q`` is split as
a difference of convex quadratics; the induced iterations (a projected
gradient map and a proximal map) run with certified descent, fixed-point and
stationarity checks.  Hot kernels are numba-compiled with a pure numpy
fallback selected through the ``DCA_IQP_BACKEND`` environment variable.
"""

from ._backend import BACKEND
from .bench import (
    CompareReport,
    CompareRow,
    SweepRecord,
    SweepReport,
    compare_ab,
    default_output_path,
    emit_table,
    rho_ladder,
    sweep,
)
from .dca import (
    ALG_PROJECTION,
    ALG_PROXIMAL,
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    STATUS_STEP_CAP,
    ConfigError,
    DcaConfig,
    DcaRun,
    DescentError,
    FixedPointError,
    projection_step,
    proximal_step,
    restart,
    run,
    smallest_parameter,
)
from .diagnostics import (
    ErrorBoundEstimate,
    KktPoint,
    RateEstimate,
    ScaleGuardError,
    distinct_kkt_values,
    enumerate_kkt,
    error_bound_probe,
    kkt_residual,
    rate_estimate,
)
from .linalg import (
    NotPositiveDefiniteError,
    SymMatrix,
    extreme_eigenvalues,
    pd_solve,
    spectral_norm,
)
from .model import (
    GenerationError,
    IqProblem,
    Polyhedron,
    active_set,
    generate_family1,
    generate_family2,
    is_feasible,
    load_problem,
    objective,
    save_problem,
)
from .qp import (
    ConvexQp,
    QpInfeasibleError,
    QpNumericalError,
    QpSolution,
    project,
    solve_qp,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "SymMatrix",
    "NotPositiveDefiniteError",
    "extreme_eigenvalues",
    "spectral_norm",
    "pd_solve",
    "Polyhedron",
    "IqProblem",
    "GenerationError",
    "objective",
    "is_feasible",
    "active_set",
    "generate_family1",
    "generate_family2",
    "save_problem",
    "load_problem",
    "ConvexQp",
    "QpSolution",
    "QpInfeasibleError",
    "QpNumericalError",
    "solve_qp",
    "project",
    "DcaConfig",
    "DcaRun",
    "ConfigError",
    "DescentError",
    "FixedPointError",
    "smallest_parameter",
    "projection_step",
    "proximal_step",
    "run",
    "restart",
    "ALG_PROJECTION",
    "ALG_PROXIMAL",
    "STATUS_CONVERGED",
    "STATUS_STEP_CAP",
    "STATUS_DIVERGED",
    "KktPoint",
    "RateEstimate",
    "ErrorBoundEstimate",
    "ScaleGuardError",
    "kkt_residual",
    "enumerate_kkt",
    "rate_estimate",
    "error_bound_probe",
    "distinct_kkt_values",
    "SweepRecord",
    "SweepReport",
    "CompareRow",
    "CompareReport",
    "rho_ladder",
    "sweep",
    "compare_ab",
    "emit_table",
    "default_output_path",
]
