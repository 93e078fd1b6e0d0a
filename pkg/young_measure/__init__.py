from .empirical import (
    SequenceSpec,
    EmpiricalYoungMeasure,
    ConcentrationReport,
    CATALOGUE,
    generate_members,
    from_samples,
    merge_atoms,
    empirical_young_measure,
    ym_pair,
    barycenter,
    concentration_mass,
    wasserstein1_per_cell,
    write_eym_csv,
)
from .residuals import MVResidualReport, dirac_measure, atomic_series, mv_residuals
from .localize import SpaceTimeSequence, LocalizationReport, project_member, time_localize
