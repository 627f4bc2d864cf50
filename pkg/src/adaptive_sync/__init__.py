"""Adaptive-coupling synchronization toolkit.

Simulators for diffusively coupled ODE networks with locally adapted
link weights and their 1-D reaction-diffusion analogue, plus a checker
for the matrix-inequality certificate that fixes the coupling threshold
k* = theta / (2 lambda2).
"""

from . import errors
from .certificate import (
    Certificate,
    CertificationReport,
    ChannelMatrices,
    certify,
    check_jacobian_inequality,
    check_structure,
)
from .dynamics import (
    PolynomialField,
    VectorField,
    bistable,
    bistable_field,
    check_jacobian,
    polynomial,
)
from .graphs import (
    Graph,
    barbell_graph,
    build_graph,
    coupling_bound,
    incidence,
    is_connected,
    lambda2,
    laplacian,
    path_graph,
)
from .metrics import (
    BoundednessReport,
    SyncMetrics,
    boundedness_guard,
    deviations,
    lyapunov,
    metrics_series,
    sync_error,
)
from .network import (
    Channel,
    NetworkState,
    Scenario,
    TrajectoryLog,
    integrate,
    link_index,
    make_channel,
    rhs,
    weight_integral_check,
)
from .pde import (
    PdeGrid,
    PdeScenario,
    PdeState,
    PdeTrajectoryLog,
    as_path_network,
    discrete_poincare_lambda2,
    discrete_rhs,
    integrate_pde,
    neumann_operator,
    spatial_sync_error,
)

__all__ = [
    "errors",
    "Certificate", "CertificationReport", "ChannelMatrices",
    "certify", "check_jacobian_inequality", "check_structure",
    "PolynomialField", "VectorField", "bistable", "bistable_field",
    "check_jacobian", "polynomial",
    "Graph", "barbell_graph", "build_graph", "coupling_bound", "incidence",
    "is_connected", "lambda2", "laplacian", "path_graph",
    "BoundednessReport", "SyncMetrics", "boundedness_guard", "deviations",
    "lyapunov", "metrics_series", "sync_error",
    "Channel", "NetworkState", "Scenario", "TrajectoryLog", "integrate",
    "link_index", "make_channel", "rhs", "weight_integral_check",
    "PdeGrid", "PdeScenario", "PdeState", "PdeTrajectoryLog",
    "as_path_network", "discrete_poincare_lambda2", "discrete_rhs",
    "integrate_pde", "neumann_operator", "spatial_sync_error",
]

__version__ = "0.1.0"
