"""Full two rigid body problem: polyhedral mutual gravity, a Lie group
variational integrator, and an adaptive RKF7(8) reference integrator."""

from .bodies import (
    DegenerateBodyError,
    ParseError,
    PolyhedralBody,
    RawBodyModel,
    ScaleFactors,
    TopologyError,
    build_body,
    nondimensionalize,
    parse_body_model,
    simplex_inertia,
)
from .dynamics import (
    G_SI,
    DiagnosticsRecord,
    InertialState,
    RelativeState,
    SystemModel,
    conserved_quantities,
    elements_to_relative_state,
    eom_rhs,
    euler313_to_rotation,
    init_inertial,
)
from .lgvi import (
    ContactError,
    ImplicitSolveError,
    LgviStepResult,
    lgvi_step,
    reconstruct_inertial_step,
    solve_implicit_rotation,
)
from .mutual_potential import (
    GravityGradients,
    MutualGravity,
    PairGeometry,
    SeriesConvergenceWarning,
    SingularConfigurationError,
    assemble_pair_geometry,
    moment,
)
from .qtensors import QOrderError, QTensorSet, compute_q_tensors
from .rkf78 import StepControl, StepUnderflowError, integrate, rkf78_step
from .simulation import (
    ConfigError,
    RunConfig,
    RunResult,
    RunSummary,
    load_config,
    osculating_elements,
    run,
)

__version__ = "0.1.0"
