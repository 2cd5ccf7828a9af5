"""Edge-LDP estimation of mixed community memberships in degree-corrected block models."""

from .dcmm import (
    AssumptionReport,
    AuditConfig,
    DcmmParams,
    audit_assumptions,
    build_omega,
    gen_theta,
    make_pi,
    make_planted_b,
    sample_adjacency,
    sample_graph,
)
from .errors import (
    DataError,
    DegenerateGeometry,
    InvalidParametersError,
    InvalidPrivacyBudgetError,
    NumericalFailure,
    ParseError,
    PrimeError,
    RegularizationFailure,
    VertexHuntInfeasible,
)
from .estimator import (
    EstimatorConfig,
    MembershipEstimate,
    compute_v1,
    estimate_memberships,
    oracle_estimate,
    reconstruct_pi_row,
    solve_barycentric,
)
from .evaluation import (
    LossReport,
    TheoryDiagnostics,
    compute_delta_n,
    compute_err_n,
    lower_bound_integral,
    permutation_loss,
    risk_bound_integral,
    theory_diagnostics,
)
from .kernels import BACKEND
from .privacy import (
    DebiasedMatrix,
    PrivacyParams,
    PrivatizedGraph,
    debias,
    flip_probability,
    ldp_certificate,
    symmetric_edge_flip,
)
from .spectral import (
    build_laplacian,
    compute_delta_hat,
    pseudo_degrees,
    score_ratios,
    select_nodes,
    top_k_eigen,
)
from .vertex_hunting import HuntConfig, SimplexVertices, distance_to_simplex, sketched_vertex_search

__version__ = "0.1.0"
