"""Desk-scale verification experiments.

Each runner draws independent trials from counter-based per-trial random
streams (so results are bit-identical for a given master seed regardless of
batch size or worker count), pushes them through the conditional sampler and
the root finder, and compares streaming estimators against the closed-form
predictions:

* ``cond_density``        scaled radial density around a conditioned zero
* ``pair_corr``           scaled two-point correlation around a base point
* ``unscaled_sweep``      N x correction integral -> -(pi^2/12) ddbar ratio
* ``variance_check``      MC variance of a linear statistic vs the
                          bipotential double quadrature
* ``joint_density_small_n``  ratios of the unnormalised joint zero density
                          against empirical tuple binning

Trials parallelise inside the jitted root-finder; the number of threads
comes from ``ZEROCOND_THREADS`` (see ``_aberth``).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._aberth import backend_name
from ._version import __version__
from .densities import (
    FsRadialBump,
    QuadratureError,
    correction_target,
    flat_model_log_integral,
    joint_zero_density_unnormalized,
    kappa_cond,
    pair_correlation_limit,
    unscaled_correction,
)
from .ensembles import (
    PROJECTIVE_LINE,
    ConditionSpec,
    EnsembleSpec,
    project_batch,
)
from .numerics import RadialCurve, StreamingStat, sample_std_complex_gaussian_array, trial_rng
from .zeros import ZeroFindingError, find_zeros_batch

EXPERIMENT_NAMES = (
    "cond_density",
    "pair_corr",
    "unscaled_sweep",
    "variance_check",
    "joint_density_small_n",
)

RESIDUAL_LIMIT = 1e-8
DELTA_ROOT_SCALED_LIMIT = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, JSON-round-trippable experiment description."""

    experiment: str
    model: str = PROJECTIVE_LINE
    degree: int = 100
    trials: int = 100_000
    master_seed: int = 7
    base_point: complex = 0j
    r_min: float = 0.2
    r_max: float = 3.0
    n_bins: int = 14
    n_sweep: tuple = (50, 100, 200, 400)
    bump_radius: float = 0.5
    bump_amplitude: float = 1.0
    bump_kind: str = "bump"
    window_scale: float = 0.5
    batch_size: int = 512
    z_limit: float = 4.0
    min_bin_hits: int = 100
    rel_err_limit: float = 0.05
    rel_err_hits: int = 10_000
    joint_n: int = 2
    joint_eps: float = 0.3
    multi_point: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.experiment in ("cond_density", "pair_corr") and self.r_min <= 0:
            raise ValueError("r_min must be > 0 (the point mass is excluded)")

    def spec(self) -> EnsembleSpec:
        return EnsembleSpec(self.model, self.degree)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["base_point"] = [self.base_point.real, self.base_point.imag]
        d["n_sweep"] = list(self.n_sweep)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        bp = d.get("base_point", 0)
        if isinstance(bp, (list, tuple)):
            d["base_point"] = complex(bp[0], bp[1])
        else:
            d["base_point"] = complex(bp)
        d["n_sweep"] = tuple(d.get("n_sweep", (50, 100, 200, 400)))
        return cls(**d)


@dataclass
class ExperimentResult:
    experiment: str
    config: dict
    passed: bool
    max_abs_z_score: float
    scalars: dict
    curve: Optional[RadialCurve] = None
    theory: Optional[np.ndarray] = None
    z_scores: Optional[np.ndarray] = None
    runtime_seconds: float = 0.0
    version: str = __version__
    backend: str = field(default_factory=backend_name)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    runner = {
        "cond_density": run_cond_density,
        "pair_corr": run_pair_corr,
        "unscaled_sweep": run_unscaled_sweep,
        "variance_check": run_variance_check,
        "joint_density_small_n": run_joint_density_smallN,
    }[cfg.experiment]
    return runner(cfg)


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _coeff_batches(cfg: ExperimentConfig, dim: int):
    """Per-trial Philox coefficient rows, yielded in trial order."""
    for t0 in range(0, cfg.trials, cfg.batch_size):
        nb = min(cfg.batch_size, cfg.trials - t0)
        block = np.empty((nb, dim), dtype=np.complex128)
        for i in range(nb):
            rng = trial_rng(cfg.master_seed, t0 + i)
            block[i] = sample_std_complex_gaussian_array(rng, dim)
        yield t0, block


def _roots_or_raise(coeffs, spec, t0):
    try:
        roots, hres, converged = find_zeros_batch(coeffs, spec)
    except ValueError as exc:  # degree-deficient row: measure-zero event
        raise ZeroFindingError(str(exc), f"trial block starting at {t0}") from exc
    bad = ~converged | (hres.max(axis=1) > RESIDUAL_LIMIT)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ZeroFindingError(
            f"unconverged roots (h-residual {hres[idx].max():.2e})",
            f"trial {t0 + idx}",
        )
    return roots


def _scaled_fs_radii(roots: np.ndarray, p: complex, spec: EnsembleSpec) -> np.ndarray:
    if spec.is_projective:
        d = np.arctan2(np.abs(roots - p), np.abs(1.0 + roots * np.conj(p)))
        return math.sqrt(spec.degree) * d
    return np.abs(roots - p)


def _bin_counts(values: np.ndarray, edges: np.ndarray):
    """Per-row histogram counts; returns (counts[B, nbins], out_of_range[B])."""
    nb = len(edges) - 1
    rows, cols = values.shape
    idx = np.searchsorted(edges, values, side="right") - 1
    valid = (values >= edges[0]) & (values < edges[-1]) & (idx >= 0) & (idx < nb)
    row_ix = np.broadcast_to(np.arange(rows)[:, None], values.shape)
    flat = row_ix[valid] * nb + idx[valid]
    counts = np.bincount(flat, minlength=rows * nb).reshape(rows, nb)
    return counts, cols - counts.sum(axis=1)


def _annulus_measures(cfg: ExperimentConfig, edges: np.ndarray) -> np.ndarray:
    """Scaled area of each radial bin annulus (exact metric area x N)."""
    if cfg.model == PROJECTIVE_LINE:
        d = edges / math.sqrt(cfg.degree)
        return cfg.degree * math.pi * np.diff(np.sin(d) ** 2)
    return math.pi * np.diff(edges ** 2)


def _kappa_denominators(cfg: ExperimentConfig, edges: np.ndarray) -> np.ndarray:
    """Per-bin divisor turning mean counts into kappa estimates.

    The expected count per trial in a radial bin is kappa_bar times the
    scaled annulus area times the flat intensity 1/pi, i.e. kappa_bar x
    N Delta(sin^2 d) on the sphere and kappa_bar x Delta(r^2) in the plane.
    """
    return _annulus_measures(cfg, edges) / math.pi


def _binned_theory(cfg: ExperimentConfig, edges: np.ndarray, kappa_fn) -> np.ndarray:
    """Metric-area-weighted bin averages of a scaled radial density."""
    out = np.empty(len(edges) - 1)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        r = np.linspace(lo, hi, 201)
        if cfg.model == PROJECTIVE_LINE:
            w = np.sin(2.0 * r / math.sqrt(cfg.degree))
        else:
            w = r
        k = kappa_fn(r)
        out[i] = np.trapezoid(k * w, r) / np.trapezoid(w, r)
    return out


# ---------------------------------------------------------------------------
# Conditional scaled density
# ---------------------------------------------------------------------------


def run_cond_density(cfg: ExperimentConfig) -> ExperimentResult:
    """Empirical scaled radial density around a conditioned zero vs the
    closed-form limit kappa_1^cond; the certain root at the base point is
    excluded from the histogram (it is the point mass of the limit law)."""
    t_start = time.perf_counter()
    spec = cfg.spec()
    p = cfg.base_point
    cond = ConditionSpec([p], [0])
    edges = np.linspace(cfg.r_min, cfg.r_max, cfg.n_bins + 1)
    theory = _binned_theory(cfg, edges, lambda r: kappa_cond(1, r))
    measures = _kappa_denominators(cfg, edges)

    stats = [StreamingStat() for _ in range(cfg.n_bins)]
    out_of_window = 0
    total_roots = 0
    worst_delta_radius = 0.0

    for t0, block in _coeff_batches(cfg, spec.dim):
        block = project_batch(spec, cond, block)
        roots = _roots_or_raise(block, spec, t0)
        radii = _scaled_fs_radii(roots, p, spec)
        nearest = np.argmin(radii, axis=1)
        rmin = radii[np.arange(len(radii)), nearest]
        worst_delta_radius = max(worst_delta_radius, float(rmin.max()))
        if np.any(rmin > DELTA_ROOT_SCALED_LIMIT):
            k = int(np.argmax(rmin))
            raise ZeroFindingError(
                f"conditioned root missing (nearest scaled radius {rmin[k]:.2e})",
                f"trial {t0 + k}",
            )
        radii[np.arange(len(radii)), nearest] = np.inf  # drop the certain root
        counts, out = _bin_counts(radii, edges)
        out_of_window += int(out.sum()) - len(radii)  # minus excluded roots
        total_roots += radii.size
        for i in range(cfg.n_bins):
            stats[i].update_batch(counts[:, i])

    hits = np.array([s.mean * s.count for s in stats])
    empirical = np.array([s.mean for s in stats]) / measures
    std_err = np.array([s.std_err for s in stats]) / measures
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std_err > 0, (empirical - theory) / std_err, 0.0)
        rel = np.abs(empirical / theory - 1.0)

    eligible = hits >= cfg.min_bin_hits
    dense = hits >= cfg.rel_err_hits
    max_z = float(np.abs(z[eligible]).max()) if eligible.any() else 0.0
    passed = bool(
        (np.abs(z[eligible]) <= cfg.z_limit).all()
        and (rel[dense] <= cfg.rel_err_limit).all()
    )
    curve = RadialCurve(edges, empirical, std_err, hits.round().astype(np.int64))
    conservation = int(hits.round().sum()) + out_of_window + cfg.trials == total_roots
    return ExperimentResult(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        passed=passed and conservation,
        max_abs_z_score=max_z,
        scalars={
            "total_roots": total_roots,
            "in_bins": int(hits.round().sum()),
            "out_of_window": out_of_window,
            "excluded_delta_roots": cfg.trials,
            "conservation_ok": conservation,
            "worst_delta_scaled_radius": worst_delta_radius,
            "max_rel_err_dense_bins": float(rel[dense].max()) if dense.any() else 0.0,
        },
        curve=curve,
        theory=theory,
        z_scores=z,
        runtime_seconds=time.perf_counter() - t_start,
    )


# ---------------------------------------------------------------------------
# Pair correlation
# ---------------------------------------------------------------------------


def run_pair_corr(cfg: ExperimentConfig) -> ExperimentResult:
    """Scaled pair correlation around the base point from unconditioned
    samples: ordered pairs whose first zero lies in a shrinking window, the
    second binned by scaled separation and normalised by intensity^2 times
    the annulus area."""
    t_start = time.perf_counter()
    spec = cfg.spec()
    p = cfg.base_point
    n = cfg.degree
    edges = np.linspace(cfg.r_min, cfg.r_max, cfg.n_bins + 1)
    theory = _binned_theory(cfg, edges, pair_correlation_limit)
    measures = _annulus_measures(cfg, edges)

    if cfg.model == PROJECTIVE_LINE:
        window = cfg.window_scale * math.sqrt(math.log(n) / n)
        window_area = math.pi * math.sin(window) ** 2
        intensity = n / math.pi
    else:
        window = cfg.window_scale * math.sqrt(math.log(n))
        window_area = math.pi * window ** 2
        intensity = 1.0 / math.pi
    # denominators: window area x intensity^2 x metric annulus area
    denom = window_area * intensity ** 2 * (measures / (n if spec.is_projective else 1.0))

    stats = [StreamingStat() for _ in range(cfg.n_bins)]
    first_total = 0
    pairs_out = 0

    for t0, block in _coeff_batches(cfg, spec.dim):
        roots = _roots_or_raise(block, spec, t0)
        dist_p = _scaled_fs_radii(roots, p, spec) / math.sqrt(n)  # metric distance
        counts = np.zeros((len(roots), cfg.n_bins), dtype=np.int64)
        for b in range(len(roots)):
            first = np.nonzero(dist_p[b] < window)[0]
            if len(first):
                first_total += len(first)
                zi = roots[b, first][:, None]
                zj = roots[b][None, :]
                if spec.is_projective:
                    d = np.arctan2(np.abs(zi - zj), np.abs(1.0 + zi * np.conj(zj)))
                    sep = math.sqrt(n) * d
                else:
                    sep = np.abs(zi - zj)
                sep[np.arange(len(first)), first] = np.inf  # no self pairs
                c, out = _bin_counts(sep, edges)
                counts[b] = c.sum(axis=0)
                pairs_out += int(out.sum()) - len(first)
        for i in range(cfg.n_bins):
            stats[i].update_batch(counts[:, i])

    hits = np.array([s.mean * s.count for s in stats])
    empirical = np.array([s.mean for s in stats]) / denom
    std_err = np.array([s.std_err for s in stats]) / denom
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std_err > 0, (empirical - theory) / std_err, 0.0)
    eligible = hits >= cfg.min_bin_hits
    max_z = float(np.abs(z[eligible]).max()) if eligible.any() else 0.0
    # decorrelation: outermost eligible bins must sit near 1
    outer = eligible & (edges[:-1] >= 2.5)
    outer_ok = bool(np.all(np.abs(empirical[outer] - 1.0) <= 0.03)) if outer.any() else True
    passed = bool((np.abs(z[eligible]) <= cfg.z_limit).all() and outer_ok)
    curve = RadialCurve(edges, empirical, std_err, hits.round().astype(np.int64))
    return ExperimentResult(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        passed=passed,
        max_abs_z_score=max_z,
        scalars={
            "window_metric_radius": window,
            "first_elements": first_total,
            "pairs_in_bins": int(hits.round().sum()),
            "pairs_out_of_window": pairs_out,
            "outer_bins_near_one": outer_ok,
        },
        curve=curve,
        theory=theory,
        z_scores=z,
        runtime_seconds=time.perf_counter() - t_start,
    )


# ---------------------------------------------------------------------------
# Unscaled correction sweep
# ---------------------------------------------------------------------------


def run_unscaled_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Quadrature sweep of the conditioning correction: N x integral must
    approach -(pi^2/12) x (i ddbar phi / Omega)(p) with remainder decaying
    like a fitted power of N inside [0.4, 1.1]."""
    t_start = time.perf_counter()
    if not cfg.n_sweep:
        raise ValueError("n_sweep must be nonempty")
    p = cfg.base_point
    bump = FsRadialBump(center=p, radius=cfg.bump_radius,
                        amplitude=cfg.bump_amplitude, kind=cfg.bump_kind)
    target = correction_target(p, bump)
    table = []
    for n in cfg.n_sweep:
        spec_n = EnsembleSpec.projective_line(int(n))
        corr = unscaled_correction(spec_n, p, bump)
        table.append((int(n), corr, n * corr, n * corr - target))
    ns = np.array([row[0] for row in table], dtype=float)
    errs = np.array([abs(row[3]) for row in table])
    if np.any(errs == 0.0):
        exponent = 1.0
    else:
        slope, _ = np.polyfit(np.log(ns), np.log(errs), 1)
        exponent = -float(slope)
    flat = flat_model_log_integral()
    flat_err = abs(flat + math.pi ** 3 / 6.0)
    decreasing = bool(np.all(np.diff(errs) < 0))

    scalars = {
        "target": target,
        "sweep": [{"N": n, "correction": c, "n_corr": nc, "deviation": dv}
                  for (n, c, nc, dv) in table],
        "decay_exponent": exponent,
        "deviations_decreasing": decreasing,
        "flat_model_integral": flat,
        "flat_model_abs_err": flat_err,
    }
    if cfg.multi_point:
        scalars["multi_point"] = _multi_point_check(cfg)
    passed = bool(0.4 <= exponent <= 1.1 and decreasing and flat_err <= 1e-8)
    return ExperimentResult(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        passed=passed,
        max_abs_z_score=0.0,
        scalars=scalars,
        runtime_seconds=time.perf_counter() - t_start,
    )


def _multi_point_check(cfg: ExperimentConfig) -> dict:
    """Two separated conditioning points: correction vs sum of singles."""
    n = int(cfg.n_sweep[-1])
    spec = EnsembleSpec.projective_line(n)
    p1, p2 = 0j, 1.5 + 0j
    b1 = FsRadialBump(center=p1, radius=0.4, amplitude=cfg.bump_amplitude)
    b2 = FsRadialBump(center=p2, radius=0.4, amplitude=cfg.bump_amplitude)
    multi = unscaled_correction(spec, [p1, p2], [b1, b2])
    singles = (unscaled_correction(spec, p1, b1)
               + unscaled_correction(spec, [p1], [b2])
               + unscaled_correction(spec, p2, b2)
               + unscaled_correction(spec, [p2], [b1]))
    return {
        "N": n,
        "multi": multi,
        "sum_of_singles": singles,
        "rel_diff": abs(multi - singles) / abs(multi),
    }


# ---------------------------------------------------------------------------
# Variance vs bipotential
# ---------------------------------------------------------------------------


def run_variance_check(cfg: ExperimentConfig) -> ExperimentResult:
    """Monte Carlo variance of (Z_s, phi) = sum_roots phi(root) against the
    double quadrature of the bipotential:

        Var = int int Q_N(z,w) (i ddbar phi)(z) (i ddbar phi)(w)

    (both sides computed independently; agreement within 3 standard errors
    of the MC estimate)."""
    t_start = time.perf_counter()
    spec = cfg.spec()
    bump = FsRadialBump(center=cfg.base_point, radius=cfg.bump_radius,
                        amplitude=cfg.bump_amplitude)
    values = np.empty(cfg.trials)
    pos = 0
    for t0, block in _coeff_batches(cfg, spec.dim):
        roots = _roots_or_raise(block, spec, t0)
        phis = bump.value(roots)
        values[pos: pos + len(roots)] = phis.sum(axis=1)
        pos += len(roots)

    nt = cfg.trials
    mean = float(values.mean())
    centered = values - mean
    s2 = float(np.dot(centered, centered) / (nt - 1))
    m4 = float(np.mean(centered ** 4))
    se_s2 = math.sqrt(max(m4 - s2 * s2 * (nt - 3) / (nt - 1), 0.0) / nt)

    quad_var = _bipotential_double_quadrature(spec, bump)
    zscore = (s2 - quad_var) / se_s2 if se_s2 > 0 else 0.0
    passed = bool(abs(zscore) <= 3.0)
    return ExperimentResult(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        passed=passed,
        max_abs_z_score=abs(float(zscore)),
        scalars={
            "mc_variance": s2,
            "mc_variance_se": se_s2,
            "quad_variance": quad_var,
            "z_score": float(zscore),
            "mc_mean": mean,
        },
        runtime_seconds=time.perf_counter() - t_start,
    )


def _bipotential_double_quadrature(spec: EnsembleSpec, bump: FsRadialBump,
                                   rel_tol: float = 1e-4) -> float:
    """int int Q(z,w) g(|z|) g(|w|) dA dA for a bump centred at 0, reduced
    to (rho_z, rho_w, angle) by rotation invariance.

    The integrand carries a smooth ridge of width 1/sqrt(N) along the
    diagonal, so refinement is kept going until successive doublings agree
    to rel_tol (the quadrature error is then far below the Monte Carlo
    standard error it is compared against)."""
    if bump.center != 0:
        raise ValueError("variance quadrature assumes the bump is centred at 0")
    # the bump is radial in geodesic distance, so its chart support is the
    # disk |z| < tan(radius) for either model
    rmax = math.tan(bump.radius)
    prev = None
    history = []
    for n_r, n_t in ((48, 64), (96, 128), (192, 256), (384, 512)):
        x, wx = np.polynomial.legendre.leggauss(n_r)
        rho = 0.5 * rmax * (x + 1.0)
        wr = 0.5 * rmax * wx
        g = bump.ddbar_density(rho.astype(complex))
        theta = 2.0 * math.pi * np.arange(n_t) / n_t
        zi = rho[:, None, None]
        wj = (rho[None, :, None] * np.exp(1j * theta)[None, None, :])
        if spec.is_projective:
            a = np.abs(1.0 + zi * np.conj(wj))
            b = np.abs(zi - wj)
            s2 = (b / np.hypot(a, b)) ** 2
            lam = -0.5 * spec.degree * np.log1p(-np.minimum(s2, 1.0 - 1e-300))
            p2 = np.exp(-2.0 * lam)
        else:
            p2 = np.exp(-np.abs(zi - wj) ** 2)
        q = _dilog_vec(p2) / FOUR_PI_SQ
        inner = (q * (2.0 * math.pi / n_t)).sum(axis=2)
        integrand = (g * rho * wr)[:, None] * (g * rho * wr)[None, :] * inner
        val = 2.0 * math.pi * float(integrand.sum())
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            return val
        history.append(val)
        prev = val
    raise QuadratureError("bipotential double quadrature did not converge", history)


def _dilog_vec(x: np.ndarray) -> np.ndarray:
    from .numerics import dilog

    return dilog(np.clip(x, 0.0, 1.0))


FOUR_PI_SQ = 4.0 * math.pi ** 2


# ---------------------------------------------------------------------------
# Joint density at small N
# ---------------------------------------------------------------------------


def run_joint_density_smallN(cfg: ExperimentConfig) -> ExperimentResult:
    """Ratios of the unnormalised joint zero density at fixed configurations
    vs empirical tuple-binning frequencies (kernel-free counting)."""
    t_start = time.perf_counter()
    n = cfg.joint_n
    if n > 4:
        raise ValueError("joint-density experiment supports N <= 4")
    spec = EnsembleSpec(cfg.model, n)
    eps = cfg.joint_eps

    if n == 1:
        configs = [np.array([0j]), np.array([1.0 + 0j])]
    else:
        base = np.array([0.3 + 0j, 0.8 - 0.2j, -0.4 + 0.5j, 0.1 - 0.7j])[:n]
        rot = base * np.exp(0.7j)
        configs = [base, rot]

    hits = np.zeros(len(configs), dtype=np.int64)
    for t0, block in _coeff_batches(cfg, spec.dim):
        roots = _roots_or_raise(block, spec, t0)
        for ci, conf in enumerate(configs):
            hits[ci] += _count_tuple_matches(roots, conf, eps)

    theory = np.array([joint_zero_density_unnormalized(n, c) for c in configs])
    theory_ratio = theory[0] / theory[1]
    if hits.min() == 0:
        ratio = math.inf
        se_ratio = math.inf
    else:
        ratio = hits[0] / hits[1]
        se_ratio = ratio * math.sqrt(1.0 / hits[0] + 1.0 / hits[1])
    zscore = (ratio - theory_ratio) / se_ratio if np.isfinite(se_ratio) else math.inf
    if n == 1:
        rel = abs(ratio / 4.0 - 1.0)
        passed = bool(rel <= 0.05)
    else:
        passed = bool(abs(zscore) <= 3.0)
    return ExperimentResult(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        passed=passed,
        max_abs_z_score=abs(float(zscore)) if np.isfinite(zscore) else math.inf,
        scalars={
            "configs": [[ [zc.real, zc.imag] for zc in c] for c in configs],
            "hits": hits.tolist(),
            "empirical_ratio": float(ratio),
            "ratio_se": float(se_ratio),
            "theory_ratio": float(theory_ratio),
            "z_score": float(zscore) if np.isfinite(zscore) else math.inf,
        },
        runtime_seconds=time.perf_counter() - t_start,
    )


def _count_tuple_matches(roots: np.ndarray, config: np.ndarray, eps: float) -> int:
    """Trials whose root multiset matches ``config`` within eps per point."""
    from itertools import permutations

    n = len(config)
    if n == 1:
        return int((np.abs(roots[:, 0] - config[0]) < eps).sum())
    match = np.zeros(len(roots), dtype=bool)
    for perm in permutations(range(n)):
        ok = np.ones(len(roots), dtype=bool)
        for k, j in enumerate(perm):
            ok &= np.abs(roots[:, k] - config[j]) < eps
        match |= ok
    return int(match.sum())
