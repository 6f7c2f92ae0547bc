"""Adaptive sampling and domain learning for least-squares approximation
of black-box functions on unknown domains of interest."""

__version__ = "0.1.0"

from .blackbox import (
    Indicator,
    Problem,
    eval_test_function,
    indicator_for,
    is_defined,
    make_problem,
    eval_test_function_batch,
)
from .driver import (
    METHODS,
    MethodConfig,
    SamplingState,
    SimulationTruth,
    rejection_sample,
    run,
    truth_from_values,
    update_domain,
)
from .experiment import (
    ExperimentConfig,
    export_plotdata,
    hc_ladder,
    run_experiment,
)
from .grid import (
    DomainEstimate,
    Grid,
    build_grid,
    full_estimate,
    load_grid,
    restrict_measure,
    save_grid,
)
from .lsq import FitResult, LsSystem, assemble, solve, stability_alpha
from .measures import (
    ChristoffelWeights,
    MeasureAssignment,
    Schedule,
    assign_measures,
    build_schedule,
    christoffel,
    draw_index,
)
from .metrics import (
    LevelRecord,
    RunRecord,
    aggregate,
    inv_alpha,
    inv_beta,
    mismatch_volume,
    rejection_rate,
    relative_error,
)
from .polyspace import (
    BasisEval,
    IndexSet,
    QRFactors,
    assemble_B,
    eval_basis,
    eval_on_grid,
    hyperbolic_cross,
    legendre_values,
    orthonormal_values,
    qr_factor,
)
