"""Inverse medium scattering with Kalman-filter reconstruction algorithms.

Forward model: a collocated Lippmann-Schwinger solver on a square grid with
far-field and Frechet-derivative operators. Inversion: full-data
Levenberg-Marquardt, the Kalman filter Levenberg-Marquardt sweep and the
iterative extended Kalman filter, each with either re-initialised or
carried-over weight operators.
"""

__version__ = "0.1.0"

from .grid import Grid, MediumField, make_grid, mse, inner_product_X, phantom, unit_directions
from .forward import (
    ForwardModel,
    GreenMatrix,
    SolverError,
    assemble_far_field_operator,
    assemble_frechet_matrix,
    assemble_green_matrix,
    far_field,
    frechet_apply,
    solve_total_field,
    weighted_adjoint,
)
from .filters import (
    FilterError,
    FilterState,
    MeasurementSet,
    RegularizationSchedule,
    WeightPolicy,
    apply_weight_policy,
    ekf_sweep,
    flm_step,
    full_tikhonov,
    kalman_update,
    kfl_sweep,
    morozov_alpha,
)
from .experiments import (
    ScenarioConfig,
    RunHistory,
    equivalence_harness,
    run_reconstruction,
    synthesize_measurements,
)
