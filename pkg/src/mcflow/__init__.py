"""mcflow: curvature-driven interface motion through topological changes.

Solvers for the 2-D Allen-Cahn phase-field model (time-stepping schemes,
energy minimization with an optional potential penalty, and a coarse-to-fine
multilevel minimizer) together with a finite-difference level-set reference
solver, benchmark initial conditions, interface diagnostics and a batch CLI.
"""

from .backend import active as active_backend, available as available_backends, use as use_backend
from .bench import (
    Circle,
    InitialCondition,
    RandomField,
    SignedDistance,
    Tanh,
    TopologyTimeline,
    TwoCircles,
    Uniform,
    Wedges,
    classify_topology,
    count_components,
    final_classification,
    make_initial_condition,
    measure_radius,
)
from .discretization import (
    Field,
    GridSpec,
    LinearSolveReport,
    apply_neumann_laplacian,
    dirichlet_energy,
    lumped_inner_product,
    lumped_norm,
    prolongate,
    restrict,
    solve_screened_poisson,
)
from .energy import (
    Functional,
    StepParams,
    double_well,
    energy_gradient,
    j_eps,
    penalized_step_energy,
    scaled_step_energy,
    step_energy,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    GridMismatchError,
    MCFlowError,
    VanishedInterfaceError,
)
from .levelset import LevelSetState, ls_run, ls_step
from .minimize import (
    MinimizeReport,
    MultilevelSchedule,
    minimize_functional,
    multilevel_step,
    run_minimization,
    step_minimization,
)
from .schemes import (
    EvolutionRecord,
    NewtonConfig,
    SchemeId,
    run_evolution,
    scheme_residual,
    step_scheme,
)

__version__ = "0.1.0"
