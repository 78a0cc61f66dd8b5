"""Zero sets of sampled sections on the projective line.

A section s = Sum a_j f_j is a polynomial q(z) = Sum a_j c_j z^j in the
affine chart; its projective zeros are the affine roots of q plus a root at
infinity for each missing top-degree coefficient.  Roots come from the
batched Aberth-Ehrlich solver (see ``_aberth``), with Newton polish and
h-normalised residual control; roots beyond |z| = 1e6 are re-polished in the
swapped chart and moved to the infinity bucket when they stay within 1e-6
of the origin there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._aberth import ABERTH_MAXIT, ABERTH_TOL, aberth_batch
from .ensembles import EnsembleSpec, SectionSample, _log_coeffs

FAR_ROOT_CUTOFF = 1e6
RESIDUAL_LIMIT = 1e-8
DELTA_ROOT_FLAG = 1e-9


class ZeroFindingError(RuntimeError):
    """Aberth iteration failed to converge for some sample."""

    def __init__(self, message: str, label: Optional[str]):
        prov = f" [sample: {label}]" if label else ""
        super().__init__(message + prov)
        self.label = label


@dataclass
class ZeroSet:
    """All N projective zeros: affine roots plus the infinity bucket."""

    affine_roots: np.ndarray
    roots_at_infinity: int
    residual_max: float

    def total(self) -> int:
        return len(self.affine_roots) + self.roots_at_infinity


def monomial_rows(coeffs: np.ndarray, spec: EnsembleSpec):
    """Monomial coefficient rows q_j = a_j c_j, row-normalised.

    Returns ``(rows, log_row_scale)`` with the true coefficients equal to
    rows * exp(log_row_scale[:, None]); normalisation keeps every row's
    largest magnitude at 1 (roots are scale invariant) and absorbs the
    log-space basis constants, so degrees up to the cap never overflow.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
    logc = _log_coeffs(spec)
    shift = float(logc.max())
    rows = coeffs * np.exp(logc - shift)[None, :]
    row_max = np.abs(rows).max(axis=1)
    if np.any(row_max == 0.0):
        raise ValueError("identically zero section has no zero divisor")
    rows = rows / row_max[:, None]
    return rows, shift + np.log(row_max)


def _log_metric_weight(roots: np.ndarray, spec: EnsembleSpec) -> np.ndarray:
    """log of the chart-matched h-weight factor multiplying |q-hat| at each
    root (reversed-chart evaluation is implied for |root| > 1)."""
    a = np.abs(roots)
    outer = a > 1.0
    n = spec.degree
    if spec.is_projective:
        m = np.where(outer, 1.0 / np.where(a == 0.0, 1.0, a), a)
        return -0.5 * n * np.log1p(m * m)
    safe = np.where(a == 0.0, 1.0, a)
    return np.where(outer, n * np.log(safe), 0.0) - 0.5 * a * a


def _h_residuals(resid, roots, log_row_scale, coeff_norms, spec):
    """h-normalised residuals: ||s(root)||_h / (||a|| sqrt(||Pi(z,z)||))."""
    n = spec.degree
    log_diag = (math.log(n + 1) if spec.is_projective else 0.0) - math.log(math.pi)
    with np.errstate(divide="ignore"):
        out = np.log(np.maximum(resid, 1e-320))
    out += log_row_scale[:, None] + _log_metric_weight(roots, spec)
    out -= np.log(coeff_norms)[:, None] + 0.5 * log_diag
    return np.exp(out)


def _eval_qhat(row: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """|q-hat| at each root, evaluated in the chart of the root."""
    deg = len(row) - 1
    a = np.abs(roots)
    outer = a > 1.0
    z = np.where(outer, 0.0, roots)
    w = np.where(outer, 1.0 / np.where(roots == 0.0, 1.0, roots), 0.0)
    pv = np.full(roots.shape, row[deg], dtype=np.complex128)
    qv = np.full(roots.shape, row[0], dtype=np.complex128)
    for k in range(deg - 1, -1, -1):
        pv = pv * z + row[k]
        qv = qv * w + row[deg - k]
    return np.where(outer, np.abs(qv), np.abs(pv))


def find_zeros_batch(coeffs: np.ndarray, spec: EnsembleSpec,
                     maxit: int = ABERTH_MAXIT, tol: float = ABERTH_TOL):
    """Roots for a batch of coefficient rows of full degree.

    Returns ``(roots, h_residuals, converged)``; rows whose top coefficient
    vanishes exactly (a measure-zero event) must go through ``find_zeros``.
    """
    rows, log_scale = monomial_rows(coeffs, spec)
    if np.any(rows[:, -1] == 0.0):
        raise ValueError("degree-deficient row in batch; use find_zeros")
    roots, resid, _, converged = aberth_batch(rows, maxit, tol)
    norms = np.linalg.norm(np.atleast_2d(coeffs), axis=1)
    hres = _h_residuals(resid, roots, log_scale, norms, spec)
    return roots, hres, converged


def find_zeros(sample: SectionSample, spec: EnsembleSpec,
               maxit: int = ABERTH_MAXIT, tol: float = ABERTH_TOL) -> ZeroSet:
    """All projective zeros of one sampled section, residual-polished."""
    coeffs = sample.coeffs
    rows, log_scale = monomial_rows(coeffs, spec)
    row = rows[0]
    deg = spec.degree
    n_inf = 0
    while deg > 0 and row[deg] == 0.0:
        n_inf += 1
        deg -= 1
    if deg == 0:
        return ZeroSet(np.empty(0, np.complex128), n_inf, 0.0)
    sub = np.ascontiguousarray(row[: deg + 1])[None, :]
    roots, _, _, converged = aberth_batch(sub, maxit, tol)
    roots = roots[0]

    far = np.abs(roots) > FAR_ROOT_CUTOFF
    if np.any(far):
        roots, n_more_inf = _swap_chart_filter(sub[0], roots, deg)
        n_inf += n_more_inf

    if len(roots):
        qhat = _eval_qhat(sub[0], roots)
        hres = _h_residuals(qhat[None, :], roots[None, :], log_scale,
                            np.array([np.linalg.norm(coeffs)]), spec)
        residual_max = float(hres.max())
    else:
        residual_max = 0.0
    if not converged[0] or residual_max > RESIDUAL_LIMIT:
        raise ZeroFindingError(
            f"root finding did not converge (max h-residual {residual_max:.2e})",
            sample.label,
        )
    return ZeroSet(roots, n_inf, residual_max)


def _swap_chart_filter(row, roots, deg):
    """Re-polish far roots as w = 1/z on the reversed polynomial; park them
    at infinity when they stay below 1e-6 there."""
    rrow = row[::-1].copy()
    keep = []
    n_inf = 0
    for z in roots:
        if abs(z) <= FAR_ROOT_CUTOFF:
            keep.append(z)
            continue
        w = 1.0 / z
        for _ in range(3):
            pv = rrow[deg]
            dv = 0.0 + 0.0j
            for k in range(deg - 1, -1, -1):
                dv = dv * w + pv
                pv = pv * w + rrow[k]
            if dv == 0.0:
                break
            w = w - pv / dv
        if abs(w) < 1.0 / FAR_ROOT_CUTOFF:
            n_inf += 1
        else:
            keep.append(1.0 / w)
    return np.asarray(keep, dtype=np.complex128), n_inf


def scaled_radii(zs: ZeroSet, p: complex, spec: EnsembleSpec):
    """sqrt(N)-rescaled distances of the affine roots from the base point.

    Projective line: exact Fubini-Study geodesic distance (arctan
    convention, fixed in ``kernels.fs_distance``) times sqrt(N);
    Bargmann-Fock is already at unit scale, so the plain Euclidean distance
    is returned.  Radii below 1e-9 (the conditioned root itself) are
    flagged for exclusion from histograms.

    Returns ``(radii, flagged)``.
    """
    p = complex(p)
    roots = zs.affine_roots
    if spec.is_projective:
        d = np.arctan2(np.abs(roots - p), np.abs(1.0 + roots * np.conj(p)))
        radii = math.sqrt(spec.degree) * d
    else:
        radii = np.abs(roots - p)
    return radii, radii < DELTA_ROOT_FLAG


def infinity_scaled_radius(p: complex, spec: EnsembleSpec) -> float:
    """Scaled radius assigned to the point at infinity (projective line)."""
    if not spec.is_projective:
        return math.inf
    return math.sqrt(spec.degree) * (0.5 * math.pi - math.atan(abs(complex(p))))
