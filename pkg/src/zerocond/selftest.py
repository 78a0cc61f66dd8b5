"""Fast invariant suite behind `zerocond selftest`.

Analytic identities and small deterministic runs only; the heavy Monte Carlo
acceptance checks live in tests/test_acceptance.py.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import densities as D
from . import kernels as K
from .cli import summary_payload
from .ensembles import ConditionSpec, EnsembleSpec, condition_sample, evaluate_section
from .experiments import ExperimentConfig, run_cond_density
from .numerics import StreamingStat, dilog, trial_rng, zeta_value
from .zeros import find_zeros


def _check_special_functions():
    assert abs(dilog(1.0) - math.pi ** 2 / 6) < 1e-12
    assert abs(dilog(0.5) - (math.pi ** 2 / 12 - math.log(2) ** 2 / 2)) < 1e-12
    for x in (0.1, 0.37, 0.62, 0.93):
        lhs = dilog(x) + dilog(1 - x)
        rhs = math.pi ** 2 / 6 - math.log(x) * math.log(1 - x)
        assert abs(lhs - rhs) < 1e-10
    assert abs(zeta_value(2) - math.pi ** 2 / 6) < 1e-12
    assert abs(zeta_value(3) - 1.2020569031595943) < 1e-12


def _check_maincor_identity():
    ts = np.geomspace(1e-3, 10.0, 40)
    for m in (1, 2, 3, 4):
        lam, mu = D.RadialProfile.hessian_eigenvalues(ts)
        lhs = lam ** (m - 1) * mu
        rhs = D.kappa_cond(m, np.sqrt(ts))
        assert np.max(np.abs(lhs / rhs - 1.0)) < 1e-12


def _check_kernels():
    spec = EnsembleSpec.projective_line(2)
    assert abs(K.kernel_eval(spec, 1.0, 0.0).p_n - 0.5) < 1e-14
    rng = np.random.default_rng(5)
    spec = EnsembleSpec.projective_line(30)
    for _ in range(12):
        z, w = (complex(*rng.normal(size=2)) for _ in range(2))
        a = K.kernel_eval(spec, z, w)
        b = K.kernel_eval_basis_sum(spec, z, w)
        assert abs(a.p_n - b.p_n) < 1e-10
        assert abs(a.p_n - K.kernel_eval(spec, w, z).p_n) < 1e-14
        assert a.p_n <= 1.0
    r100 = K.near_diagonal_residual(EnsembleSpec.projective_line(100), 0, 1, 0)
    r400 = K.near_diagonal_residual(EnsembleSpec.projective_line(400), 0, 1, 0)
    assert abs(r100 - (1.01 ** -50 / math.exp(-0.5) - 1)) < 1e-12
    assert abs(r400) < abs(r100)
    spec = EnsembleSpec.projective_line(100)
    d = 4.0 * math.sqrt(math.log(100) / 100)
    assert K.far_offdiagonal_check(spec, math.tan(d), 0.0) < 100.0 ** -4


def _check_conditional_kernel():
    spec = EnsembleSpec.projective_line(50)
    for z, p in ((0.4 + 0.2j, -0.6), (1.1 - 0.3j, 0.25 + 0.8j)):
        lhs = K.conditional_kernel_diag(spec, [p], z)
        pn = K.kernel_eval(spec, z, p).p_n
        rhs = K.diag_kernel_norm(spec, z) * (1 - pn ** 2)
        assert abs(lhs - rhs) <= 1e-10 * rhs
    pts = [0.4, -0.5 + 0.3j]
    z = 0.2 + 0.6j
    a = K.conditional_kernel_diag(spec, pts, z)
    b = K.conditional_kernel_diag_oracle(spec, pts, z)
    assert abs(a - b) <= 1e-6 * b
    assert K.conditional_kernel_diag(spec, pts, pts[0]) < 1e-10


def _check_conditioning():
    spec = EnsembleSpec.projective_line(12)
    cond = ConditionSpec([0.3 + 0.4j, -0.9j], [0, 0.5])
    rng = trial_rng(11, 0)
    s = condition_sample(spec, cond, rng)
    for p, v in zip(cond.points, cond.values):
        raw, _ = evaluate_section(s, spec, p)
        assert abs(raw - v) <= 1e-10 * max(s.norm, 1.0)


def _check_potentials():
    spec = EnsembleSpec.projective_line(40)
    assert abs(D.bipotential(spec, 0.3, 0.3) - 1.0 / 24.0) < 1e-14
    for z, w in ((0.3, 0.9), (0.1 + 0.2j, -0.4)):
        lam = K.kernel_eval(spec, z, w).lambda_n
        assert abs(D.pair_potential(lam) - D.bipotential(spec, z, w)) < 1e-10
    assert abs(D.flat_model_log_integral() + math.pi ** 3 / 6) < 1e-8


def _check_density_mass():
    from scipy.integrate import quad

    spec = EnsembleSpec.projective_line(60)
    val, _ = quad(lambda d: D.conditional_density_finiteN(spec, 0, math.tan(d))
                  * math.pi * math.sin(2 * d),
                  1e-9, math.pi / 2 - 1e-12, limit=300)
    assert abs(val + 1 - spec.degree) < 1e-3 * spec.degree


def _check_joint_density():
    r = D.joint_zero_density_unnormalized(1, [0.0]) / D.joint_zero_density_unnormalized(1, [1.0])
    assert abs(r - 4.0) < 1e-8
    a = D.joint_zero_density_unnormalized(2, [0.3, 0.8 - 0.2j])
    c = D.joint_zero_density_unnormalized(2, [0.3 * np.exp(0.7j), (0.8 - 0.2j) * np.exp(0.7j)])
    assert abs(a / c - 1.0) < 1e-8


def _check_zeros():
    spec = EnsembleSpec.projective_line(2)
    # z^2 - 1 in the orthonormal basis: coefficients (-1, 0, 1)/sqrt stuff
    from .ensembles import SectionSample, _log_coeffs

    c = np.exp(_log_coeffs(spec))
    coeffs = np.array([-1.0 / c[0], 0.0, 1.0 / c[2]], dtype=complex)
    zs = find_zeros(SectionSample(coeffs), spec)
    roots = sorted(zs.affine_roots, key=lambda z: z.real)
    assert abs(roots[0] + 1) < 1e-12 and abs(roots[1] - 1) < 1e-12
    spec = EnsembleSpec.projective_line(30)
    rng = trial_rng(3, 1)
    from .ensembles import sample_section

    zs = find_zeros(sample_section(spec, rng), spec)
    assert zs.total() == 30 and zs.residual_max < 1e-8


def _check_streaming_merge():
    rng = np.random.default_rng(0)
    xs = rng.normal(size=1000)
    a, b, c = StreamingStat(), StreamingStat(), StreamingStat()
    for x in xs:
        a.update(x)
    b.update_batch(xs[:400])
    c.update_batch(xs[400:])
    b.merge(c)
    assert abs(a.mean - b.mean) < 1e-12 and abs(a.variance - b.variance) < 1e-12


def _check_determinism():
    cfg = ExperimentConfig(experiment="cond_density", degree=20, trials=200,
                           master_seed=123, n_bins=6, r_min=0.3, r_max=2.4,
                           batch_size=64)
    r1 = run_cond_density(cfg)
    r2 = run_cond_density(cfg)
    s1 = json.dumps(summary_payload(r1), sort_keys=True)
    s2 = json.dumps(summary_payload(r2), sort_keys=True)
    assert s1 == s2


CHECKS = [
    ("special functions", _check_special_functions),
    ("scaling-limit identity", _check_maincor_identity),
    ("kernel closed forms", _check_kernels),
    ("conditional kernel downdate", _check_conditional_kernel),
    ("exact conditioning", _check_conditioning),
    ("potentials", _check_potentials),
    ("finite-N density mass", _check_density_mass),
    ("joint density", _check_joint_density),
    ("root finding", _check_zeros),
    ("streaming merge", _check_streaming_merge),
    ("determinism", _check_determinism),
]


def run(verbose: bool = True) -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
            if verbose:
                print(f"PASS  {name}")
        except AssertionError as exc:
            failures += 1
            if verbose:
                print(f"FAIL  {name}: {exc}")
    if verbose:
        print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
