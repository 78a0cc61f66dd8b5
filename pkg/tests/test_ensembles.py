import math

import numpy as np
import pytest

from zerocond.ensembles import (
    ConditioningError,
    ConditionSpec,
    EnsembleSpec,
    SectionSample,
    basis_eval,
    condition_sample,
    constraint_basis,
    diag_kernel_norm,
    evaluate_section,
    project_batch,
    project_to_conditions,
    sample_section,
    scaled_basis,
)
from zerocond.numerics import sample_std_complex_gaussian_array, trial_rng


class TestSpec:
    def test_dims(self):
        assert EnsembleSpec.projective_line(7).dim == 8
        assert EnsembleSpec.bargmann_fock(50).dim == 51

    def test_validation(self):
        with pytest.raises(ValueError):
            EnsembleSpec("sphere", 3)
        with pytest.raises(ValueError):
            EnsembleSpec.projective_line(0)
        with pytest.raises(ValueError):
            EnsembleSpec.projective_line(5000)
        # explicit override lifts the cap
        assert EnsembleSpec.projective_line(5000, degree_cap=5000).degree == 5000


class TestBasis:
    def test_n2_at_origin(self):
        spec = EnsembleSpec.projective_line(2)
        values, weight = basis_eval(spec, 0.0)
        assert values[1] == 0 and values[2] == 0
        assert weight == 1.0
        # direct basis-sum oracle: ||Pi(0,0)|| = |f_0(0)|^2 = 3/pi
        assert abs(abs(values[0]) ** 2 - 3 / math.pi) < 1e-14

    @pytest.mark.parametrize("degree", [1, 10, 300, 2000])
    def test_diagonal_identity(self, degree, rng):
        # binomial-theorem identity verified by direct summation
        spec = EnsembleSpec.projective_line(degree, degree_cap=2000)
        target = (degree + 1) / math.pi
        for z in (0.0, 0.3 + 0.4j, 2.0 - 1.0j, 50.0j, 1e8):
            total = diag_kernel_norm(spec, z)
            assert abs(total - target) <= 1e-10 * target

    def test_bargmann_fock_truncation(self):
        spec = EnsembleSpec.bargmann_fock(50)
        val = diag_kernel_norm(spec, 1.0)
        # tail bound: sum_{j>50} 1/j! < 2/51!
        tail = 2.0 / math.factorial(51)
        assert abs(val - 1 / math.pi) <= (tail / math.pi + 1e-13) * math.pi
        assert abs(val * math.pi - 1) < 1e-12

    def test_scaled_pair_consistency(self):
        # basis_eval pair multiplies back to the h-normalised values
        spec = EnsembleSpec.projective_line(500)
        z = 3.0 + 1.0j
        values, weight = basis_eval(spec, z)
        sval, ls, lw = scaled_basis(spec, z)
        assert np.allclose(values * weight, sval * math.exp(ls + lw), rtol=1e-12)


class TestSampling:
    def test_deterministic_under_seed(self):
        spec = EnsembleSpec.projective_line(6)
        a = sample_section(spec, trial_rng(5, 0)).coeffs
        b = sample_section(spec, trial_rng(5, 0)).coeffs
        assert np.array_equal(a, b)

    def test_coefficient_covariance(self):
        spec = EnsembleSpec.projective_line(5)
        n = 100_000
        rng = trial_rng(17, 0)
        draws = sample_std_complex_gaussian_array(rng, n * spec.dim).reshape(n, spec.dim)
        cov = draws.conj().T @ draws / n
        # 4 sigma CLT bound on each entry at 1e5 samples
        assert np.max(np.abs(cov - np.eye(spec.dim))) < 4 / math.sqrt(n) * 1.1


class TestConditioning:
    def test_origin_kills_constant_coefficient(self):
        spec = EnsembleSpec.projective_line(8)
        s = condition_sample(spec, ConditionSpec([0.0]), trial_rng(3, 0))
        assert s.coeffs[0] == 0

    def test_zero_value_residuals(self):
        spec = EnsembleSpec.projective_line(12)
        cond = ConditionSpec([0.37 - 0.41j])
        coeffs = np.stack([
            sample_std_complex_gaussian_array(trial_rng(19, i), spec.dim)
            for i in range(10_000)
        ])
        proj = project_batch(spec, cond, coeffs)
        values, ls, _ = scaled_basis(spec, cond.points[0])
        resid = np.abs(proj @ values) * math.exp(ls)
        norms = np.linalg.norm(proj, axis=1)
        assert np.max(resid / norms) < 1e-10

    def test_prescribed_values_exact(self):
        spec = EnsembleSpec.projective_line(15)
        cond = ConditionSpec([0.2, -0.7j], [1.5 - 0.5j, 0.25])
        s = condition_sample(spec, cond, trial_rng(23, 0))
        for p, v in zip(cond.points, cond.values):
            raw, _ = evaluate_section(s, spec, p)
            assert abs(raw - v) < 1e-10 * max(1.0, s.norm)

    def test_projection_idempotent(self):
        spec = EnsembleSpec.projective_line(20)
        cond = ConditionSpec([0.5, 1.0 + 1.0j, -2.0], [0, 0.3, 0])
        s = condition_sample(spec, cond, trial_rng(29, 0))
        s2 = project_to_conditions(spec, cond, s)
        assert np.max(np.abs(s2.coeffs - s.coeffs)) < 1e-12 * max(1.0, s.norm)

    def test_conditional_covariance_matches_projector(self):
        # Gaussian conditioning oracle: cov = I - V (V*V)^{-1} V*
        spec = EnsembleSpec.projective_line(10)
        cond = ConditionSpec([0.0, 1.0])
        n = 100_000
        coeffs = np.stack([
            sample_std_complex_gaussian_array(trial_rng(31, i), spec.dim)
            for i in range(n)
        ])
        proj = project_batch(spec, cond, coeffs)
        emp = proj.conj().T @ proj / n
        v = np.empty((spec.dim, 2), dtype=complex)
        for k, p in enumerate(cond.points):
            values, _, _ = scaled_basis(spec, p)
            v[:, k] = np.conj(values)
        oracle = np.eye(spec.dim) - v @ np.linalg.solve(v.conj().T @ v, v.conj().T)
        # 3 standard errors; entry se ~ 1/sqrt(n)
        assert np.max(np.abs(emp - oracle)) < 3.5 / math.sqrt(n)

    def test_small_size_projector(self):
        # d = 3, r = 1 distribution correctness at Monte Carlo accuracy
        spec = EnsembleSpec.projective_line(2)
        cond = ConditionSpec([0.6])
        n = 100_000
        coeffs = np.stack([
            sample_std_complex_gaussian_array(trial_rng(37, i), spec.dim)
            for i in range(n)
        ])
        proj = project_batch(spec, cond, coeffs)
        emp = proj.conj().T @ proj / n
        values, _, _ = scaled_basis(spec, 0.6)
        u = np.conj(values) / np.linalg.norm(values)
        oracle = np.eye(3) - np.outer(u, u.conj())
        assert np.max(np.abs(emp - oracle)) < 3 / math.sqrt(n)

    def test_ill_conditioned_points_raise(self):
        spec = EnsembleSpec.projective_line(50)
        cond = ConditionSpec([0.5, 0.5 + 1e-9])
        with pytest.raises(ConditioningError) as err:
            constraint_basis(spec, cond)
        assert err.value.condition_number > 1e12

    def test_validation(self):
        with pytest.raises(ValueError):
            ConditionSpec([0.5, 0.5])
        with pytest.raises(ValueError):
            ConditionSpec([0.1, 0.2], [0.0])
        spec = EnsembleSpec.projective_line(1)
        with pytest.raises(ValueError):
            constraint_basis(spec, ConditionSpec([0.0, 1.0]))

    def test_all_zero_flag(self):
        assert ConditionSpec([0.1, 0.2]).all_zero
        assert not ConditionSpec([0.1], [1.0]).all_zero


class TestEvaluation:
    def test_constant_basis_element(self):
        spec = EnsembleSpec.projective_line(2)
        s = SectionSample(np.array([1.0, 0, 0], dtype=complex))
        for z in (0.0, 1.0, 2.0 - 1.0j):
            raw, _ = evaluate_section(s, spec, z)
            assert abs(raw - math.sqrt(3 / math.pi)) < 1e-14

    def test_top_monomial_vanishes_at_origin(self):
        spec = EnsembleSpec.projective_line(5)
        s = SectionSample(np.eye(6, dtype=complex)[5])
        raw, h = evaluate_section(s, spec, 0.0)
        assert raw == 0 and h == 0

    def test_linearity(self):
        spec = EnsembleSpec.projective_line(9)
        a = sample_section(spec, trial_rng(41, 0)).coeffs
        b = sample_section(spec, trial_rng(41, 1)).coeffs
        al, be = 1.3 - 0.2j, -0.7j
        z = 0.4 + 0.9j
        lhs, _ = evaluate_section(SectionSample(al * a + be * b), spec, z)
        ra, _ = evaluate_section(SectionSample(a), spec, z)
        rb, _ = evaluate_section(SectionSample(b), spec, z)
        assert abs(lhs - (al * ra + be * rb)) < 1e-12 * max(abs(lhs), 1.0)

    def test_h_norm_bounded_at_extreme_degree(self):
        spec = EnsembleSpec.projective_line(2000, degree_cap=2000)
        s = sample_section(spec, trial_rng(43, 0))
        _, h = evaluate_section(s, spec, 10.0 + 3.0j)
        assert np.isfinite(h)
        assert h <= s.norm * math.sqrt(diag_kernel_norm(spec, 0.0)) * (1 + 1e-12)
