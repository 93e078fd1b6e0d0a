from .models import (
    EnergyModel,
    HessianBlock,
    QuadraticThermoelastic,
    PowerLawCoupled,
    PolyconvexDet,
    RankOneDefective,
    TildeEnergyModel,
    MODEL_CATALOGUE,
    make_model,
    tilde_energy,
    energy,
    stress,
    temperature,
    hessian,
)
from .relative import (
    State,
    relative_energy,
    relative_stress,
    relative_temperature,
    relative_entropy_density,
    relative_energy_values,
    relative_stress_values,
    relative_temperature_values,
)
from .recovery import recover_entropy, recover_entropy_values
from .audits import (
    HypothesisReport,
    ConstantsReport,
    check_growth_hypotheses,
    relative_bounds_report,
    relative_energy_estimates,
)
