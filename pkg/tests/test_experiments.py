import json
import math

import numpy as np
import pytest

from zerocond.cli import summary_payload
from zerocond.experiments import (
    ExperimentConfig,
    run_cond_density,
    run_experiment,
    run_joint_density_smallN,
    run_pair_corr,
    run_unscaled_sweep,
    run_variance_check,
)


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig(experiment="cond_density", degree=42,
                               base_point=0.3 - 0.2j, trials=10,
                               n_sweep=(10, 20))
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="nope")
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="cond_density", trials=0)
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="cond_density", r_min=0.0)


COND_SMOKE_CFG = ExperimentConfig(experiment="cond_density", degree=40,
                                  trials=1500, master_seed=101, n_bins=8,
                                  r_min=0.3, r_max=2.7, batch_size=256)
PAIR_SMOKE_CFG = ExperimentConfig(experiment="pair_corr", degree=40,
                                  trials=1500, master_seed=103, n_bins=8,
                                  r_min=0.3, r_max=2.7, batch_size=256)


@pytest.fixture(scope="module")
def cond_smoke():
    return run_cond_density(COND_SMOKE_CFG)


@pytest.fixture(scope="module")
def pair_smoke():
    return run_pair_corr(PAIR_SMOKE_CFG)


class TestCondDensity:
    CFG = COND_SMOKE_CFG

    @pytest.fixture()
    def result(self, cond_smoke):
        return cond_smoke

    def test_conservation(self, result):
        s = result.scalars
        assert s["conservation_ok"]
        assert s["total_roots"] == self.CFG.trials * self.CFG.degree
        assert s["excluded_delta_roots"] == self.CFG.trials

    def test_delta_root_always_found(self, result):
        assert result.scalars["worst_delta_scaled_radius"] < 1e-6

    def test_reasonable_agreement(self, result):
        # generous bound at this tiny trial count; the tight criterion runs
        # in the acceptance suite
        assert result.max_abs_z_score < 6.0

    def test_curve_shapes(self, result):
        assert result.curve.n_bins == 8
        assert len(result.theory) == 8
        assert np.all(result.theory > 0)

    def test_deterministic_rerun(self, result):
        again = run_cond_density(self.CFG)
        assert json.dumps(summary_payload(again), sort_keys=True) == \
               json.dumps(summary_payload(result), sort_keys=True)

    def test_base_point_off_origin(self):
        cfg = ExperimentConfig(experiment="cond_density", degree=30, trials=400,
                               master_seed=7, n_bins=5, r_min=0.3, r_max=2.3,
                               base_point=0.5 + 0.25j)
        res = run_cond_density(cfg)
        assert res.scalars["conservation_ok"]
        assert res.scalars["worst_delta_scaled_radius"] < 1e-6


class TestPairCorr:
    CFG = PAIR_SMOKE_CFG

    @pytest.fixture()
    def result(self, pair_smoke):
        return pair_smoke

    def test_runs_and_collects_pairs(self, result):
        assert result.scalars["first_elements"] > 0
        assert result.scalars["pairs_in_bins"] > 0

    def test_curve_monotone_onset(self, result):
        # strong repulsion at short range: first bin well below the outer ones
        vals = result.curve.value
        assert vals[0] < 0.5 * vals[-1]

    def test_deterministic(self, result):
        again = run_pair_corr(self.CFG)
        assert json.dumps(summary_payload(again), sort_keys=True) == \
               json.dumps(summary_payload(result), sort_keys=True)


class TestBinnedTheory:
    def test_cond_theory_decorrelates(self):
        # theory column approaches 1 in the outermost bins
        from zerocond.experiments import _binned_theory
        from zerocond.densities import kappa_cond
        import numpy as np

        cfg = ExperimentConfig(experiment="cond_density", degree=100)
        th = _binned_theory(cfg, np.array([2.5, 3.0]), lambda r: kappa_cond(1, r))
        assert abs(th[0] - 1.0) < 0.02


class TestUnscaledSweep:
    def test_sweep_passes(self):
        cfg = ExperimentConfig(experiment="unscaled_sweep", trials=1,
                               n_sweep=(50, 100, 200, 400), multi_point=True)
        res = run_unscaled_sweep(cfg)
        assert res.passed
        assert 0.4 <= res.scalars["decay_exponent"] <= 1.1
        assert res.scalars["flat_model_abs_err"] <= 1e-8
        assert res.scalars["multi_point"]["rel_diff"] <= 0.01
        # C_1 = pi^2/12: the target for the default bump equals
        # -(pi^2/12) * (-2 A / R^2)
        expected = (math.pi ** 2 / 12) * 2.0 / 0.5 ** 2
        assert res.scalars["target"] == pytest.approx(expected, rel=1e-12)

    def test_empty_sweep_rejected(self):
        cfg = ExperimentConfig(experiment="unscaled_sweep", trials=1, n_sweep=())
        with pytest.raises(ValueError):
            run_unscaled_sweep(cfg)


class TestVarianceCheck:
    def test_small_run_agrees(self):
        cfg = ExperimentConfig(experiment="variance_check", degree=30,
                               trials=4000, master_seed=107, bump_radius=0.5)
        res = run_variance_check(cfg)
        assert abs(res.scalars["z_score"]) < 4.0
        assert res.scalars["quad_variance"] > 0

    def test_amplitude_scaling_quadratic(self):
        base = ExperimentConfig(experiment="variance_check", degree=20,
                                trials=1200, master_seed=109, bump_radius=0.5)
        doubled = ExperimentConfig(experiment="variance_check", degree=20,
                                   trials=1200, master_seed=109,
                                   bump_radius=0.5, bump_amplitude=2.0)
        r1, r2 = run_variance_check(base), run_variance_check(doubled)
        assert r2.scalars["mc_variance"] == pytest.approx(
            4 * r1.scalars["mc_variance"], rel=1e-12)
        assert r2.scalars["quad_variance"] == pytest.approx(
            4 * r1.scalars["quad_variance"], rel=1e-6)

    def test_bargmann_fock_lane(self):
        # the bump support in the chart is |z| < tan(radius) here too
        cfg = ExperimentConfig(experiment="variance_check",
                               model="bargmann_fock", degree=40,
                               trials=8000, master_seed=113, bump_radius=1.2,
                               batch_size=1000)
        res = run_variance_check(cfg)
        assert res.scalars["quad_variance"] > 0
        assert abs(res.scalars["z_score"]) < 3.5


class TestJointDensity:
    def test_n1_ratio(self):
        cfg = ExperimentConfig(experiment="joint_density_small_n", joint_n=1,
                               trials=150_000, master_seed=5, joint_eps=0.1,
                               batch_size=30_000)
        res = run_joint_density_smallN(cfg)
        assert res.scalars["theory_ratio"] == pytest.approx(4.0, rel=1e-8)
        assert abs(res.scalars["empirical_ratio"] / 4.0 - 1) < 0.1

    def test_n2_rotation_symmetry(self):
        cfg = ExperimentConfig(experiment="joint_density_small_n", joint_n=2,
                               trials=150_000, master_seed=5, joint_eps=0.3,
                               batch_size=30_000)
        res = run_joint_density_smallN(cfg)
        assert res.scalars["theory_ratio"] == pytest.approx(1.0, rel=1e-8)
        assert abs(res.scalars["z_score"]) < 3.5

    def test_dispatch(self):
        cfg = ExperimentConfig(experiment="joint_density_small_n", joint_n=1,
                               trials=2000, master_seed=3, joint_eps=0.15,
                               batch_size=1000)
        res = run_experiment(cfg)
        assert res.experiment == "joint_density_small_n"
