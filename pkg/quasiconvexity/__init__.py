from .testfields import (
    collar_mask,
    cube_mask,
    field_gradient,
    laminate_field,
    random_test_field,
    localized_test_field,
    snap_direction,
    check_test_field,
    field_size,
    normalized,
    write_test_field,
    read_test_field,
)
from .functionals import qc_quotient, evaluate_quotient, hessian_form_quotient, descend
from .search import (
    QCReport,
    EquivalenceReport,
    RankOneProfile,
    minimize_qc_quotient,
    qc_equivalence_check,
    rank_one_profile,
    classify,
)
from .garding import (
    BackgroundField,
    make_background,
    hessian_coercivity_fixed_point,
    delocalized_hessian_check,
    small_cube_radius_probe,
    garding_check,
    garding_margin,
    garding_batch,
    garding_estimate_constants,
)
