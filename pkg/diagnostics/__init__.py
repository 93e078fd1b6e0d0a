from .relative_entropy import (
    RelEntropySeries,
    GronwallFit,
    relative_entropy_total,
    rhs_terms,
    reference_trajectory,
    gronwall_fit,
)
from .experiment import (
    RunRecord,
    WeakStrongReport,
    growth_rate,
    weak_strong_experiment,
)
