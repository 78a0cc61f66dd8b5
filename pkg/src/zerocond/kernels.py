"""Two-point kernels of the section ensembles and their conditional downdates.

Closed forms are the production path:

    projective line:  P_N(z,w) = |1 + z conj(w)|^N / ((1+|z|^2)(1+|w|^2))^(N/2)
                      computed in log space,  ||Pi(z,z)|| = (N+1)/pi
    Bargmann-Fock:    P(z,w)   = exp(-|z-w|^2 / 2),  ||Pi(z,z)|| = 1/pi

The direct orthonormal-basis sum (`kernel_eval_basis_sum`) is retained as a
cross-check oracle only.  Conditioning on vanishing at points p_1..p_r
removes the span of the coherent states at those points; the diagonal of the
downdated kernel follows from the Gram matrix I + W of the coherent states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import (
    BARGMANN_FOCK,
    PROJECTIVE_LINE,
    ConditioningError,
    EnsembleSpec,
    GRAM_CONDITION_LIMIT,
    diag_kernel_norm,
    scaled_basis,
)

LAMBDA_INF = math.inf  # sentinel for p_n underflow; consumers map Y(inf)=F(inf)=0


@dataclass(frozen=True)
class KernelEval:
    """||Pi(z,w)||, the normalised kernel P in [0,1], and Lambda = -log P."""

    pi_norm: float
    p_n: float
    lambda_n: float


def _log_abs_1p(zeta: complex) -> float:
    """log |1 + zeta| without overflow for huge |zeta|."""
    a = abs(zeta)
    if a > 1e100:
        return math.log(a) + math.log(abs(1.0 + 1.0 / zeta))
    if a == 0.0:
        return 0.0
    v = abs(1.0 + zeta)
    if v == 0.0:
        return -math.inf
    return math.log(v)


def _log1p_abs2(z: complex) -> float:
    """log(1 + |z|^2), stable for huge |z|."""
    a = abs(z)
    if a > 1e100:
        return 2.0 * math.log(a)
    return math.log1p(a * a)


def lambda_projective(degree: int, z: complex, w: complex) -> float:
    """Lambda_N(z,w) = -log P_N on the projective line (exact, >= 0).

    Uses P_N = cos(d)^N with sin d = |z-w| / hypot(|1+z conj(w)|, |z-w|),
    which is cancellation-free on the diagonal (lambda ~ N d^2 / 2 retains
    full relative precision) and saturates to +inf at the antipode.
    """
    a = abs(1.0 + z * np.conj(w))
    b = abs(z - w)
    if math.isinf(a) or math.isinf(b):
        # fall back to log magnitudes for astronomically large inputs
        lam = degree * (0.5 * _log1p_abs2(z) + 0.5 * _log1p_abs2(w)
                        - _log_abs_1p(z * np.conj(w)))
        return max(lam, 0.0)
    if b == 0.0:
        return 0.0
    s2 = (b / math.hypot(a, b)) ** 2
    if s2 >= 1.0:
        return math.inf
    return -0.5 * degree * math.log1p(-s2)


def kernel_eval(spec: EnsembleSpec, z: complex, w: complex) -> KernelEval:
    """Closed-form kernel evaluation at a point pair.

    ``lambda_n`` is +inf when p_n underflows to zero (orthogonal coherent
    states, e.g. antipodal points).
    """
    z, w = complex(z), complex(w)
    if spec.model == PROJECTIVE_LINE:
        lam = lambda_projective(spec.degree, z, w)
        diag = (spec.degree + 1) / math.pi
    elif spec.model == BARGMANN_FOCK:
        lam = 0.5 * abs(z - w) ** 2
        diag = 1.0 / math.pi
    else:  # pragma: no cover
        raise ValueError(spec.model)
    p = math.exp(-lam) if lam < math.inf else 0.0
    lam = LAMBDA_INF if p == 0.0 else lam
    return KernelEval(pi_norm=diag * p, p_n=p, lambda_n=lam)


def kernel_eval_basis_sum(spec: EnsembleSpec, z: complex, w: complex) -> KernelEval:
    """Oracle: the same quantities from the direct orthonormal-basis sum."""
    vz, lsz, lwz = scaled_basis(spec, z)
    vw, lsw, lww = scaled_basis(spec, w)
    inner = complex(np.dot(vz, np.conj(vw)))
    pi_norm = abs(inner) * math.exp(lsz + lwz + lsw + lww)
    dz = diag_kernel_norm(spec, z)
    dw = diag_kernel_norm(spec, w)
    p = pi_norm / math.sqrt(dz * dw)
    p = min(p, 1.0)
    lam = -math.log(p) if p > 0.0 else LAMBDA_INF
    return KernelEval(pi_norm=pi_norm, p_n=p, lambda_n=lam)


# ---------------------------------------------------------------------------
# Geometry helpers
# ---------------------------------------------------------------------------


def fs_distance(z: complex, w: complex) -> float:
    """Fubini-Study geodesic distance on the projective line.

    Convention: metric |dz|^2/(1+|z|^2)^2, i.e. the round sphere of radius
    1/2; d(0, z) = arctan |z| and antipodal points are pi/2 apart.
    """
    z, w = complex(z), complex(w)
    # |1+z conj(w)|^2 + |z-w|^2 = (1+|z|^2)(1+|w|^2), so atan2 of the pair
    # is exact and stable at both the diagonal and the antipode.
    return math.atan2(abs(z - w), abs(1.0 + z * np.conj(w)))


def point_distance(spec: EnsembleSpec, z: complex, w: complex) -> float:
    """The metric distance used by the kernel estimates for this model."""
    if spec.model == PROJECTIVE_LINE:
        return fs_distance(z, w)
    return abs(complex(z) - complex(w))


def normal_chart_point(spec: EnsembleSpec, z0: complex, u: complex) -> complex:
    """Chart point with normal coordinate u at z0.

    For the projective line this is the exact Fubini-Study isometry moving 0
    to z0 (a Moebius map), so the coordinate is normal to all orders; for
    Bargmann-Fock translation z0 + u.
    """
    z0, u = complex(z0), complex(u)
    if spec.model == PROJECTIVE_LINE:
        return (z0 + u) / (1.0 - np.conj(z0) * u)
    return z0 + u


def near_diagonal_residual(spec: EnsembleSpec, z0: complex, u: complex, v: complex,
                           b: float = 4.0) -> float:
    """Residual R_N(u,v) of the universal near-diagonal profile.

    R_N = P_N(z0 + u/sqrt(N), z0 + v/sqrt(N)) * exp(+|u-v|^2/2) - 1 in the
    normal coordinates at z0.  Valid (and enforced) for
    |u| + |v| <= b sqrt(log N); Bargmann-Fock is the scaling fixed point, so
    the residual vanishes there identically.
    """
    u, v = complex(u), complex(v)
    n = spec.degree
    if abs(u) + abs(v) > b * math.sqrt(math.log(n)):
        raise ValueError(
            f"|u|+|v| = {abs(u)+abs(v):.3f} outside the near-diagonal range "
            f"b*sqrt(log N) = {b * math.sqrt(math.log(n)):.3f}"
        )
    if spec.model == BARGMANN_FOCK:
        return 0.0
    scale = 1.0 / math.sqrt(n)
    z = normal_chart_point(spec, z0, u * scale)
    w = normal_chart_point(spec, z0, v * scale)
    lam = lambda_projective(n, z, w)
    return math.expm1(0.5 * abs(u - v) ** 2 - lam)


def far_offdiagonal_check(spec: EnsembleSpec, z: complex, w: complex,
                          b: float = 4.0) -> float:
    """Return p_n after enforcing the far-off-diagonal regime.

    Requires d(z,w) >= b sqrt(log N / N); the caller asserts the decay
    p_n <= C N^{-k} appropriate to its (b, k) pair.
    """
    n = spec.degree
    d = point_distance(spec, z, w)
    dmin = b * math.sqrt(math.log(n) / n)
    if d < dmin:
        raise ValueError(
            f"d(z,w) = {d:.4f} below far-off-diagonal threshold {dmin:.4f}"
        )
    return kernel_eval(spec, z, w).p_n


# ---------------------------------------------------------------------------
# Conditional (downdated) kernels
# ---------------------------------------------------------------------------


@dataclass
class CoherentFrame:
    """Coherent states at the conditioning points and their Gram downdate.

    ``w_perturbation`` is the Gram matrix minus the identity; ``downdate``
    is transpose((I+W)^{-1}), the matrix combining coherent-state products
    in the rank-r kernel downdate.  I+W must be Hermitian positive definite.
    """

    spec: EnsembleSpec
    points: np.ndarray
    w_perturbation: np.ndarray
    downdate: np.ndarray
    _chol: np.ndarray
    _unit_vectors: np.ndarray  # r x d rows: coherent unit coefficient vectors

    @classmethod
    def build(cls, spec: EnsembleSpec, points) -> "CoherentFrame":
        pts = np.asarray([complex(p) for p in points])
        r = len(pts)
        if len(set(pts.tolist())) != r:
            raise ValueError("conditioning points must be pairwise distinct")
        if r >= spec.dim:
            raise ValueError("need fewer conditioning points than basis dimension")
        rows = np.empty((r, spec.dim), dtype=np.complex128)
        for i, p in enumerate(pts):
            values, _, _ = scaled_basis(spec, p)
            rows[i] = np.conj(values) / np.linalg.norm(values)
        gram = rows @ rows.conj().T
        w = gram - np.eye(r)
        try:
            chol = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise ConditioningError(
                "coherent-state Gram matrix not positive definite", math.inf
            ) from None
        cond = np.linalg.cond(gram)
        if cond > GRAM_CONDITION_LIMIT:
            raise ConditioningError("conditioning points too close", float(cond))
        downdate = np.linalg.inv(gram).T
        return cls(spec=spec, points=pts, w_perturbation=w, downdate=downdate,
                   _chol=chol, _unit_vectors=rows)

    def coherent_values(self, z: complex) -> np.ndarray:
        """h-normalised coherent-state values at z (length r, complex)."""
        values, ls, lw = scaled_basis(self.spec, z)
        return (self._unit_vectors @ values) * math.exp(ls + lw)

    def conditional_diag(self, z: complex) -> float:
        """||Pi^{p_1..p_r}(z,z)|| via the Gram downdate, clamped at 0."""
        phi = self.coherent_values(z)
        y = np.linalg.solve(self._chol, phi)
        val = diag_kernel_norm(self.spec, z) - float(np.vdot(y, y).real)
        return max(val, 0.0)


def conditional_kernel_diag(spec: EnsembleSpec, points, z: complex) -> float:
    """Diagonal of the Szego kernel conditioned to vanish at ``points``.

    Equals the unconditioned diagonal minus the coherent-state downdate; it
    vanishes at the conditioning points, and for one point reduces to
    ||Pi(z,z)|| (1 - P_N(z,p)^2).
    """
    return CoherentFrame.build(spec, points).conditional_diag(z)


def conditional_kernel_diag_oracle(spec: EnsembleSpec, points, z: complex) -> float:
    """Oracle: orthonormalise the kernel of the evaluation map directly."""
    from scipy.linalg import null_space

    pts = [complex(p) for p in points]
    rows = np.empty((len(pts), spec.dim), dtype=np.complex128)
    for i, p in enumerate(pts):
        values, _, _ = scaled_basis(spec, p)
        rows[i] = values / np.linalg.norm(values)
    basis = null_space(rows)  # d x (d-r), orthonormal columns
    vz, ls, lw = scaled_basis(spec, z)
    coords = basis.conj().T @ vz
    return float(np.sum(np.abs(coords) ** 2)) * math.exp(2.0 * (ls + lw))
