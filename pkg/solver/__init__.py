from constitutive.recovery import recover_entropy
from fields.spectral import curl_residual
from .scheme import (
    SolverConfig,
    Trajectory,
    ViscousFamily,
    step,
    simulate,
    clausius_duhem_residual,
    mean_entropy_production,
    viscous_family,
    write_trajectory,
    conserved_from_primitive,
    recover_primitive,
)
from .references import (
    Reference,
    LinearWave,
    ManufacturedSolution,
    manufactured_solution,
    balance_residuals,
    l1_error,
)
