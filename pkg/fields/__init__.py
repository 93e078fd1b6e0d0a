from .grid import (
    Grid,
    GridField,
    TestField,
    make_grid,
    check_same_grid,
    grid_coordinates,
    zero_field,
    quadrature,
    v_aux,
    vp_density,
    vp_norm_sq,
    pointwise_norm,
    truncate_tau,
    truncate_tau_field,
)
from .spectral import (
    spectral_gradient,
    centered_gradient,
    spectral_divergence,
    helmholtz_curl_free,
    recover_potential,
    curl_residual,
)
from .io import write_grid_field, read_grid_field, export_csv, encode_grid_field, decode_grid_field
