"""
Tests for test fields, the quasiconvexity quotient search and the Garding
inequality estimates.
"""
import numpy as np
import pytest

from errors import InadmissibleState, InvalidTestField
from fields.grid import make_grid
from quasiconvexity import (
    check_test_field,
    delocalized_hessian_check,
    field_size,
    garding_batch,
    garding_check,
    garding_estimate_constants,
    hessian_coercivity_fixed_point,
    laminate_field,
    make_background,
    minimize_qc_quotient,
    qc_equivalence_check,
    qc_quotient,
    random_test_field,
    rank_one_profile,
    read_test_field,
    small_cube_radius_probe,
    snap_direction,
    write_test_field,
)
from quasiconvexity.functionals import descend, quotient_objective
from quasiconvexity.search import CERTIFIED, COUNTEREXAMPLE, INCONCLUSIVE, classify
from quasiconvexity.testfields import collar_mask


class TestTestFields:
    """Construction and validation of (phi, psi) pairs."""

    def test_random_field_is_normalized(self, grid2):
        tf = random_test_field(grid2, np.random.default_rng(0), modes=3, size=0.5)
        assert field_size(tf) == pytest.approx(0.5)
        check_test_field(tf)

    def test_zero_trace_field_vanishes_on_collar(self, grid2):
        tf = random_test_field(grid2, np.random.default_rng(1), boundary_mode='zero_trace')
        check_test_field(tf)
        assert np.all(tf.phi.values[:, 0, :] == 0.0)

    def test_garding_batch_rejects_periodic_fields(self, quadratic, grid2):
        bg = make_background(grid2, base_F=np.eye(2), base_eta=3.0)
        tf = random_test_field(grid2, np.random.default_rng(2))
        with pytest.raises(InvalidTestField):
            garding_check(quadratic, bg, 4.0, 0.0, [tf])

    def test_snap_direction(self):
        m, snapped, moved = snap_direction([1.0, 0.0])
        assert m.tolist() == [1, 0] and not moved
        _, _, moved = snap_direction([np.cos(0.3), np.sin(0.3)])
        assert moved

    def test_laminate_rejects_bad_fraction(self, grid2):
        with pytest.raises(ValueError):
            laminate_field(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 1.5, 1.0, grid2)

    def test_witness_files_round_trip(self, tmp_path, grid2):
        tf = random_test_field(grid2, np.random.default_rng(3), boundary_mode='zero_trace')
        paths = write_test_field(tf, str(tmp_path), 'w')
        assert [p.rsplit('/', 1)[-1] for p in paths] == ['w_phi.bin', 'w_psi.bin']
        loaded = read_test_field(str(tmp_path), 'w', 'zero_trace')
        np.testing.assert_array_equal(loaded.phi.values, tf.phi.values)
        np.testing.assert_array_equal(loaded.psi.values, tf.psi.values)


class TestQuasiconvexityQuotient:
    """The quotient and its minimization."""

    def test_classification(self):
        assert classify(0.1) == CERTIFIED
        assert classify(-0.1) == COUNTEREXAMPLE
        assert classify(0.0) == INCONCLUSIVE

    def test_quadratic_quotient_is_a_quarter(self, quadratic, grid2):
        tf = random_test_field(grid2, np.random.default_rng(4), size=0.3)
        assert qc_quotient(quadratic, np.eye(2), 0.0, tf) == pytest.approx(0.25, abs=1e-10)

    def test_quadratic_is_certified(self, quadratic):
        report = minimize_qc_quotient(quadratic, np.eye(2), 0.0, grid=make_grid(2, 16),
                                      iters=5, n_dirs=8, restarts=1)
        assert report.status == CERTIFIED
        assert report.c0_estimate == pytest.approx(0.25, abs=5e-3)
        assert report.passed

    def test_defective_model_has_counterexample(self, defective):
        report = minimize_qc_quotient(defective, np.eye(2), 0.0, grid=make_grid(2, 16),
                                      iters=20, n_dirs=16, restarts=1)
        assert report.status == COUNTEREXAMPLE
        assert report.c0_estimate < -0.1
        assert qc_quotient(defective, np.eye(2), 0.0, report.witness) == pytest.approx(report.c0_estimate)

    def test_descent_keeps_zero_trace_support(self, defective, grid2):
        tf = random_test_field(grid2, np.random.default_rng(7), boundary_mode='zero_trace', size=0.5)
        objective = quotient_objective(defective, np.eye(2), 0.0)
        start = objective(tf)[0]
        result = descend(objective, tf, iters=10, size=0.5)
        assert result.value <= start
        assert result.field.boundary_mode == 'zero_trace'
        edge = collar_mask(grid2) == 0.0
        assert np.all(result.field.phi.values[:, edge] == 0.0)
        check_test_field(result.field)

    def test_inadmissible_base_state(self, quadratic):
        with pytest.raises(InadmissibleState):
            minimize_qc_quotient(quadratic, np.eye(2), -5.0)

    def test_rank_one_profile(self, quadratic, defective):
        e1 = np.array([1.0, 0.0])
        assert rank_one_profile(quadratic, np.eye(2), 0.0, e1, e1).convex
        profile = rank_one_profile(defective, np.eye(2), 0.0, e1, e1)
        assert not profile.convex
        assert profile.min_curvature == pytest.approx(-1.0, abs=1e-6)

    def test_equivalent_forms_agree_for_quadratic(self, quadratic):
        report = qc_equivalence_check(quadratic, np.eye(2), 0.0, budget=8, grid=make_grid(2, 16))
        assert report.passed
        assert report.max_split_residual < 1e-10
        assert report.c0_definition == pytest.approx(0.25, abs=1e-10)
        assert report.c0_curl_form == pytest.approx(0.25, abs=1e-10)


class TestGarding:
    """Hessian coercivity and the Garding constants."""

    @pytest.fixture
    def background(self, grid2):
        return make_background(grid2, base_F=np.eye(2), base_eta=3.0, amplitude=0.5, K=5.0)

    def test_background_must_stay_in_ball(self, grid2):
        with pytest.raises(ValueError):
            make_background(grid2, base_F=np.eye(2), amplitude=5.0, K=1.0)

    def test_coercivity_of_quadratic(self, quadratic, background):
        report = hessian_coercivity_fixed_point(quadratic, background, n_fields=8)
        assert report.minimum == pytest.approx(1.0)

    def test_margins_sign(self, quadratic, background, grid2):
        batch = garding_batch(grid2, seed=0, n_fields=6)
        good = garding_check(quadratic, background, 4.5, 0.0, batch)
        assert good.passed and good.min_margin > 0
        bad = garding_check(quadratic, background, 3.0, 0.0, batch)
        assert not bad.passed
        assert bad.witness is batch[bad.violator]

    def test_estimated_constants_for_quadratic(self, quadratic, background):
        C0, C1, evidence = garding_estimate_constants(quadratic, background, budget=1, n_fields=6, iters=3)
        assert evidence.feasible and evidence.verified
        assert C0 == pytest.approx(0.5 * 1.125 ** 18)
        assert C1 == 0.0

    def test_delocalized_check_needs_no_penalty(self, quadratic, background):
        report = delocalized_hessian_check(quadratic, background, n_fields=8)
        assert report.c == pytest.approx(1.0)
        assert report.needed_c_pen == 0.0
        assert report.feasible_c_pen == 0.0 and report.passed

    def test_small_cube_probe(self, quadratic, background):
        report = small_cube_radius_probe(quadratic, background, background.peak_cell(), n_fields=4, c0=0.25)
        assert report.radius == 0.5
        for ratio in report.per_radius.values():
            assert ratio == pytest.approx(0.25, abs=1e-8)

    def test_small_cube_radii_descend(self, quadratic, background):
        with pytest.raises(ValueError):
            small_cube_radius_probe(quadratic, background, (0, 0), radii=(0.125, 0.5), c0=0.25)
