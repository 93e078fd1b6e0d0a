from .structure import (
    BalanceLawStructure,
    SymmetrizerResult,
    EntropyPairReport,
    conserved_vector,
    directional_flux,
    multiplier_G,
    entropy_pair_residual,
    random_admissible_states,
    symmetrizer_matrix,
)
from .analysis import (
    check_symmetrizability,
    flux_jacobian,
    max_wave_speed,
    acoustic_speed,
    legendre_hadamard_minimum,
    direction_sweep,
    sobol_directions,
    report_frame,
)
