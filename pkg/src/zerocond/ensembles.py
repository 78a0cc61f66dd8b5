"""Gaussian ensembles of random sections on the two model geometries.

Supported models
----------------
* ``projective_line`` -- degree-N polynomials with the Fubini-Study metric.
  Orthonormal basis  f_j(z) = sqrt((N+1)/pi) sqrt(C(N,j)) z^j  with metric
  weight (1+|z|^2)^(-N/2); the diagonal density Sum |f_j|^2 w^2 = (N+1)/pi
  is constant.
* ``bargmann_fock`` -- entire functions truncated at degree L with basis
  pi^(-1/2) z^j / sqrt(j!) and weight exp(-|z|^2/2).

A random section is s = Sum a_j f_j with i.i.d. standard complex Gaussian
coefficients.  Conditioning on prescribed values at points is exact linear
Gaussian conditioning: project onto the kernel of the joint evaluation map
and add the minimum-norm interpolant.

High degrees are handled by evaluating basis values in log space; see
``basis_eval`` for the scaling convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .numerics import sample_std_complex_gaussian_array

PROJECTIVE_LINE = "projective_line"
BARGMANN_FOCK = "bargmann_fock"

DEFAULT_DEGREE_CAP = 2000

# Above this log-magnitude the unscaled basis values are kept in scaled form.
_SAFE_LOG = 690.0

# Conditioning fails when the coherent-state Gram matrix has condition
# number above this (artifact threshold; the asymptotic theory only covers
# well-separated points where the Gram is near identity).
GRAM_CONDITION_LIMIT = 1e12


class ConditioningError(RuntimeError):
    """Raised when constraint points are numerically degenerate at this N."""

    def __init__(self, message: str, condition_number: float):
        super().__init__(f"{message} (Gram condition number ~ {condition_number:.3e})")
        self.condition_number = condition_number


@dataclass(frozen=True)
class EnsembleSpec:
    """Model geometry plus degree/truncation; fixes basis and weights."""

    model: str
    degree: int

    def __post_init__(self):
        if self.model not in (PROJECTIVE_LINE, BARGMANN_FOCK):
            raise ValueError(f"unknown model {self.model!r}")
        if self.degree < 1:
            raise ValueError("degree/truncation must be >= 1")

    @classmethod
    def projective_line(cls, degree: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> "EnsembleSpec":
        if degree > degree_cap:
            raise ValueError(
                f"degree {degree} exceeds cap {degree_cap}; pass degree_cap explicitly to override"
            )
        return cls(PROJECTIVE_LINE, degree)

    @classmethod
    def bargmann_fock(cls, truncation: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> "EnsembleSpec":
        if truncation > degree_cap:
            raise ValueError(
                f"truncation {truncation} exceeds cap {degree_cap}; pass degree_cap explicitly to override"
            )
        return cls(BARGMANN_FOCK, truncation)

    @property
    def dim(self) -> int:
        """Dimension of the section space (N+1 resp. L+1)."""
        return self.degree + 1

    @property
    def is_projective(self) -> bool:
        return self.model == PROJECTIVE_LINE


@dataclass
class SectionSample:
    """Coefficient vector of one random section in the orthonormal basis."""

    coeffs: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if not np.all(np.isfinite(self.coeffs.view(float))):
            raise ValueError("section coefficients must be finite")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True)
class ConditionSpec:
    """Linear constraints s(p_j) = v_j defining the conditional Gaussian."""

    points: tuple
    values: tuple

    def __init__(self, points: Sequence[complex], values: Optional[Sequence[complex]] = None):
        pts = tuple(complex(p) for p in points)
        if values is None:
            vals = tuple(0j for _ in pts)
        else:
            vals = tuple(complex(v) for v in values)
        if len(vals) != len(pts):
            raise ValueError("points and values must have equal length")
        if len(pts) == 0:
            raise ValueError("at least one constraint required")
        if len(set(pts)) != len(pts):
            raise ValueError("constraint points must be pairwise distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def r(self) -> int:
        return len(self.points)

    @property
    def all_zero(self) -> bool:
        return all(v == 0 for v in self.values)


# ---------------------------------------------------------------------------
# Basis evaluation (log-space)
# ---------------------------------------------------------------------------


def _log_coeffs(spec: EnsembleSpec) -> np.ndarray:
    """log of the positive basis constants c_j (f_j(z) = c_j z^j)."""
    j = np.arange(spec.dim)
    n = spec.degree
    if spec.is_projective:
        lbin = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1)
        return 0.5 * (math.log(n + 1) - math.log(math.pi) + lbin)
    return -0.5 * math.log(math.pi) - 0.5 * gammaln(j + 1)


def _log_weight(spec: EnsembleSpec, z: complex) -> float:
    az2 = abs(z) ** 2
    if spec.is_projective:
        if abs(z) > 1e100:
            lw = 2.0 * math.log(abs(z))
        else:
            lw = math.log1p(az2)
        return -0.5 * spec.degree * lw
    return -0.5 * az2


def scaled_basis(spec: EnsembleSpec, z: complex):
    """Basis values in scaled form.

    Returns ``(values, log_scale, log_weight)`` with

        f_j(z)              = values[j] * exp(log_scale)
        f_j(z) * h_weight   = values[j] * exp(log_scale + log_weight)

    and max |values| = 1, so products with the weight never overflow.
    """
    z = complex(z)
    logc = _log_coeffs(spec)
    if z == 0:
        values = np.zeros(spec.dim, dtype=np.complex128)
        values[0] = 1.0
        return values, float(logc[0]), _log_weight(spec, z)
    j = np.arange(spec.dim)
    logmag = logc + j * math.log(abs(z))
    shift = float(logmag.max())
    phases = np.exp(1j * j * np.angle(z))
    values = np.exp(logmag - shift) * phases
    return values, shift, _log_weight(spec, z)


def basis_eval(spec: EnsembleSpec, z: complex):
    """Orthonormal basis values and metric weight at z.

    Returns ``(values, h_weight)`` with ``values[j] * h_weight`` equal to the
    h-normalised basis value.  For moderate magnitudes (log scale below ~690)
    ``values`` are the literal basis values f_j(z) and ``h_weight`` the
    literal metric weight; beyond that the common overflow-guard scale is
    moved from ``values`` into ``h_weight`` so the pair stays finite.
    """
    values, ls, lw = scaled_basis(spec, z)
    if ls <= _SAFE_LOG and lw >= -_SAFE_LOG:
        return values * math.exp(ls), math.exp(lw)
    return values, math.exp(min(ls + lw, _SAFE_LOG))


def diag_kernel_norm(spec: EnsembleSpec, z: complex = 0j) -> float:
    """||Pi(z,z)|| from the basis sum.

    Exactly (N+1)/pi for the projective line (any z); the truncated
    Bargmann-Fock value approaches 1/pi when the truncation exceeds |z|^2 by
    a comfortable margin.
    """
    values, ls, lw = scaled_basis(spec, z)
    s = float(np.sum(np.abs(values) ** 2))
    return s * math.exp(2.0 * (ls + lw))


def sample_section(spec: EnsembleSpec, rng: np.random.Generator,
                   label: Optional[str] = None) -> SectionSample:
    """Draw i.i.d. standard complex Gaussian coefficients.

    Resamples on the measure-zero all-zeros event so downstream root-finding
    always has a nonzero section.
    """
    coeffs = sample_std_complex_gaussian_array(rng, spec.dim)
    while not np.any(coeffs):
        coeffs = sample_std_complex_gaussian_array(rng, spec.dim)
    return SectionSample(coeffs, label=label)


# ---------------------------------------------------------------------------
# Conditioning
# ---------------------------------------------------------------------------


@dataclass
class _ConstraintBasis:
    """QR factors of the unit constraint (coherent) vectors."""

    q: np.ndarray          # d x r, orthonormal columns spanning the constraints
    r_factor: np.ndarray   # r x r upper triangular
    rhs: np.ndarray        # h-normalised prescribed values
    gram_cond: float


def constraint_basis(spec: EnsembleSpec, cond: ConditionSpec) -> _ConstraintBasis:
    d, r = spec.dim, cond.r
    if r >= d:
        raise ValueError(f"number of constraints {r} must be < basis dimension {d}")
    cols = np.empty((d, r), dtype=np.complex128)
    rhs = np.empty(r, dtype=np.complex128)
    for i, (p, v) in enumerate(zip(cond.points, cond.values)):
        values, ls, _ = scaled_basis(spec, p)
        nrm = np.linalg.norm(values)
        cols[:, i] = np.conj(values) / nrm
        rhs[i] = v * math.exp(-ls) / nrm
    q, r_mat = np.linalg.qr(cols)
    rcond = np.linalg.cond(r_mat)
    if not np.isfinite(rcond) or rcond ** 2 > GRAM_CONDITION_LIMIT:
        raise ConditioningError(
            f"constraint points too close for degree {spec.degree}", rcond ** 2
        )
    return _ConstraintBasis(q=q, r_factor=r_mat, rhs=rhs, gram_cond=rcond ** 2)


def _min_norm_interpolant(basis: _ConstraintBasis, residual: np.ndarray) -> np.ndarray:
    y = np.linalg.solve(basis.r_factor.conj().T, residual)
    return basis.q @ y


def project_to_conditions(spec: EnsembleSpec, cond: ConditionSpec,
                          sample: SectionSample) -> SectionSample:
    """Exact conditional projection of an unconditional sample.

    Removes the component along the constraint vectors and adds the
    minimum-norm interpolant of the prescribed values; one refinement pass
    drives the constraint residual to rounding level.  Applying the same
    conditions twice is the identity.
    """
    basis = constraint_basis(spec, cond)
    a = sample.coeffs.copy()
    a -= basis.q @ (basis.q.conj().T @ a)
    a += _min_norm_interpolant(basis, basis.rhs)
    # one iterative-refinement pass against the exact constraints
    res = (basis.q @ basis.r_factor).conj().T @ a - basis.rhs
    a -= _min_norm_interpolant(basis, res)
    return SectionSample(a, label=sample.label)


def condition_sample(spec: EnsembleSpec, cond: ConditionSpec,
                     rng: np.random.Generator, label: Optional[str] = None) -> SectionSample:
    """Draw from the Gaussian conditioned on s(p_j) = v_j.

    For v = 0 this is the standard Gaussian on the kernel of the joint
    evaluation map; nonzero values shift that law by the minimum-norm
    interpolant.
    """
    return project_to_conditions(spec, cond, sample_section(spec, rng, label=label))


def project_batch(spec: EnsembleSpec, cond: ConditionSpec, coeffs: np.ndarray) -> np.ndarray:
    """Vectorised ``project_to_conditions`` over rows of ``coeffs``."""
    basis = constraint_basis(spec, cond)
    q = basis.q
    a = coeffs - (coeffs @ np.conj(q)) @ q.T
    if np.any(basis.rhs):
        interp = _min_norm_interpolant(basis, basis.rhs)
        a += interp[None, :]
    res = a @ np.conj(q @ basis.r_factor) - basis.rhs[None, :]
    y = np.linalg.solve(basis.r_factor.conj().T, res.T).T
    a -= y @ q.T
    return a


def evaluate_section(sample: SectionSample, spec: EnsembleSpec, z: complex):
    """Evaluate one section: returns ``(raw, h_norm)``.

    ``raw`` is Sum a_j f_j(z) (may overflow to inf at extreme degree and
    |z|; see ``basis_eval``); ``h_norm = |raw| * h_weight(z)`` is always
    finite.
    """
    values, ls, lw = scaled_basis(spec, z)
    s = complex(np.dot(sample.coeffs, values))
    with np.errstate(over="ignore"):
        raw = s * float(np.exp(ls))
    h = abs(s) * float(np.exp(ls + lw))
    return raw, h
