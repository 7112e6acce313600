"""frameflow: QR actions, Lyapunov flows and Morse audits on frame manifolds."""

from . import cli, errors, flows, frames, linalg, morse, skeleton, strata
from .errors import (
    FrameflowError,
    NumericalError,
    SizeLimitError,
    ValidationError,
)
from .flows import (
    AuditReport,
    AuditRow,
    FlowConfig,
    SpectralData,
    Weights,
    default_spectral,
    flow,
    flow_path,
    gradient_flow,
    gradient_path,
    lyapunov_audit,
    quad,
    quad_gradient,
    vector_field,
)
from .frames import (
    KIND_ORTHOGONAL,
    KIND_UNITARY,
    Flag,
    Frame,
    Signature,
    act,
    flag_distance,
    frame_from_json,
    frame_to_json,
    to_flag,
)
from .linalg import (
    DEFAULT_TOL,
    QRPair,
    Tolerance,
    hs_inner,
    hs_norm,
    qr_positive,
    symplectic_j,
    tangent_qr,
)
from .morse import (
    Certificate,
    CriticalReport,
    Polynomial,
    counting_bijection,
    counting_inverse,
    critical_report,
    eigenframe,
    fixed_points,
    hessian_spectrum,
    jacobian_spectrum,
    morse_poly,
    perfectness_certificate,
    poincare_poly,
)
from .skeleton import (
    Perm,
    SkeletonGraph,
    build_graph,
    index_h,
    leads_to,
    linked,
    one_dim_strata,
    precedes,
    singleton_tree,
    tree_bounds,
)
from .strata import (
    Tree,
    constraint_rank_deficiency,
    dimension,
    enumerate_irreducible,
    is_consistent,
    member,
    member_residual,
    sample_stratum,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "AuditRow",
    "Certificate",
    "CriticalReport",
    "DEFAULT_TOL",
    "Flag",
    "FlowConfig",
    "Frame",
    "FrameflowError",
    "KIND_ORTHOGONAL",
    "KIND_UNITARY",
    "NumericalError",
    "Perm",
    "Polynomial",
    "QRPair",
    "Signature",
    "SizeLimitError",
    "SkeletonGraph",
    "SpectralData",
    "Tolerance",
    "Tree",
    "ValidationError",
    "Weights",
    "__version__",
    "act",
    "build_graph",
    "cli",
    "constraint_rank_deficiency",
    "counting_bijection",
    "counting_inverse",
    "critical_report",
    "default_spectral",
    "dimension",
    "eigenframe",
    "enumerate_irreducible",
    "errors",
    "fixed_points",
    "flag_distance",
    "flow",
    "flow_path",
    "flows",
    "frame_from_json",
    "frame_to_json",
    "frames",
    "gradient_flow",
    "gradient_path",
    "hessian_spectrum",
    "hs_inner",
    "hs_norm",
    "index_h",
    "is_consistent",
    "jacobian_spectrum",
    "leads_to",
    "linalg",
    "linked",
    "lyapunov_audit",
    "member",
    "member_residual",
    "morse",
    "morse_poly",
    "one_dim_strata",
    "perfectness_certificate",
    "poincare_poly",
    "precedes",
    "qr_positive",
    "quad",
    "quad_gradient",
    "sample_stratum",
    "singleton_tree",
    "skeleton",
    "strata",
    "symplectic_j",
    "tangent_qr",
    "to_flag",
    "tree_bounds",
    "vector_field",
]
