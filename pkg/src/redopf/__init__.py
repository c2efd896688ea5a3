"""Reduced DC-OPF toolkit: binding-constraint prediction, an embedded
interior-point QP solver, an iterative feasibility test with an optimality
guarantee, and swarm-based meta-optimization of total solve cost."""

from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyBatch,
    EmptyDataset,
    InvalidPerturbation,
    InvalidRange,
    NonpositiveBaseline,
    ParseError,
    RedopfError,
    SolverFailure,
    UnsupportedError,
    ValidationError,
)
from .grid import (
    DEFAULT_DC_RANGES,
    Grid,
    PhiVector,
    Scenario,
    ScenarioRanges,
    identity_scenario,
    parse_case,
    phi_vector,
    sample_scenario,
    write_case,
)
from .dc_model import (
    ActiveSet,
    ConstraintCatalog,
    DcOpfProblem,
    binding_status,
    build_catalog,
    build_full,
    build_reduced,
    violated_constraints,
)
from .qp import SolveReport, SolveStatus, SolverOptions, check_kkt, solve, warm_solve

__version__ = "0.1.0"
