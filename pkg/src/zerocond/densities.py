"""Closed-form densities: scaling limits, finite-N conditional laws, the
degree-correction integral, the variance bipotential, and the small-N joint
zero density.

Conventions (fixed once, used everywhere):

* Fubini-Study metric |dz|^2/(1+|z|^2)^2 on the projective line, area form
  dA_FS = dA_euclid/(1+|z|^2)^2, total area pi; geodesic distance
  d(0,z) = arctan|z|.
* For a function f on the chart, i ddbar f = (1/2) Lap_g f * omega (metric
  Laplacian) = 2 f_{z zbar} dA_euclid; the Euclidean Laplacian is
  Lap = 4 f_{z zbar}.
* The flat reference volume (i/(2 pi) ddbar |u|^2)^m is (1/pi^m) x Lebesgue.

The radial profile g(t) = log(1-e^{-t}) + t with t = |u|^2 generates all the
scaling-limit densities: the complex Hessian of g(|u|^2) has eigenvalue
g'(t) with multiplicity m-1 and g'(t) + t g''(t) with multiplicity 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .ensembles import BARGMANN_FOCK, PROJECTIVE_LINE, EnsembleSpec
from .kernels import fs_distance, kernel_eval
from .numerics import dilog

FOUR_PI_SQ = 4.0 * math.pi ** 2


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, estimates):
        super().__init__(f"{message}; refinement history {list(estimates)}")
        self.estimates = list(estimates)


# ---------------------------------------------------------------------------
# Radial profile of the scaling limit
# ---------------------------------------------------------------------------


def _one_minus_one_plus_t_exp_neg(t):
    """1 - (1+t) e^{-t}, cancellation-safe near t = 0.

    Below t = 1e-3 the alternating series sum_{k>=2} (-1)^k (k-1)/k! t^k is
    used (six terms leave a relative error ~ t^6).
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = -np.expm1(-t) - t * np.exp(-t)
    small = t < 1e-3
    if np.any(small):
        ts = t[small]
        acc = np.zeros_like(ts)
        term = ts * ts
        fact = 2.0
        for k in range(2, 8):
            acc += (k - 1) / fact * term
            term = term * (-ts)
            fact *= k + 1
        out[small] = acc
    return float(out[0]) if scalar else out


class RadialProfile:
    """g(t) = log(1 - e^{-t}) + t and its derivatives at t = r^2 >= 0."""

    @staticmethod
    def g(t):
        t = np.asarray(t, dtype=float)
        return np.log(-np.expm1(-t)) + t

    @staticmethod
    def g1(t):
        """g'(t) = 1/(1 - e^{-t}) > 1."""
        t = np.asarray(t, dtype=float)
        return 1.0 / (-np.expm1(-t))

    @staticmethod
    def g2(t):
        """g''(t) = -e^{-t}/(1 - e^{-t})^2."""
        t = np.asarray(t, dtype=float)
        return -np.exp(-t) / np.expm1(-t) ** 2

    @staticmethod
    def hessian_eigenvalues(t):
        """(g', g' + t g'') -- the two distinct complex-Hessian eigenvalues.

        The mixed one is evaluated as (1-(1+t)e^{-t})/(1-e^{-t})^2 through
        the cancellation-safe numerator, staying in (0,1) for t > 0.
        """
        t = np.asarray(t, dtype=float)
        em = -np.expm1(-t)
        return 1.0 / em, _one_minus_one_plus_t_exp_neg(t) / (em * em)


def kappa_cond(m: int, r):
    """Scaled conditional zero density coefficient.

    kappa_m^cond(r) = (1 - (1+t) e^{-t}) / (1 - e^{-t})^{m+1} with t = r^2;
    tends to 1 for r -> inf and behaves like r^{2-2m}/2 near 0 (so m = 1 is
    neutral: no repulsion).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    t = np.asarray(r, dtype=float) ** 2
    em = -np.expm1(-t)
    val = _one_minus_one_plus_t_exp_neg(t) / em ** (m + 1)
    return float(val) if np.ndim(r) == 0 else val


def limit_density_kkm(m: int, k: int, r):
    """Radial trace density of the codimension-k scaling limit.

    The k-fold wedge of the limit form against the (m-k)-fold flat form,
    normalised by the flat volume: the degree-k elementary symmetric mean of
    the complex-Hessian eigenvalues,

        [ C(m-1,k) g'^k + C(m-1,k-1) g'^{k-1} (g' + t g'') ] / C(m,k).

    For k = m this equals ``kappa_cond(m, r)``; for r -> inf it tends to 1.
    """
    if not 1 <= k <= m:
        raise ValueError("need 1 <= k <= m")
    t = np.asarray(r, dtype=float) ** 2
    lam, mu = RadialProfile.hessian_eigenvalues(t)
    num = math.comb(m - 1, k) * lam ** k + math.comb(m - 1, k - 1) * lam ** (k - 1) * mu
    val = num / math.comb(m, k)
    return float(val) if np.ndim(r) == 0 else val


# ---------------------------------------------------------------------------
# Y / F / G-tilde potentials
# ---------------------------------------------------------------------------


def relative_potential(lam):
    """Y(lambda) = log(1 - e^{-2 lambda}); Y(inf) = 0."""
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(np.isinf(lam), 0.0, np.log(-np.expm1(-2.0 * lam)))
    return float(out) if out.ndim == 0 else out


def bipotential_profile(t):
    """G-tilde(t) = dilog(t^2) / (4 pi^2) for t in [0, 1]; peaks at 1/24."""
    t = np.asarray(t, dtype=float)
    val = dilog(t * t) / FOUR_PI_SQ
    return val


def pair_potential(lam):
    """F(lambda) = G-tilde(e^{-lambda}); decreasing with F(inf) = 0."""
    lam = np.asarray(lam, dtype=float)
    t = np.where(np.isinf(lam), 0.0, np.exp(-lam))
    out = bipotential_profile(t)
    return float(out) if np.ndim(lam) == 0 else out


def bipotential(spec: EnsembleSpec, z: complex, w: complex) -> float:
    """Variance bipotential Q_N(z,w) = G-tilde(P_N(z,w)) in [0, 1/24]."""
    p = kernel_eval(spec, z, w).p_n
    return float(bipotential_profile(p))


def pair_correlation_limit(r):
    """Scaling limit of the normalised two-point zero correlation (m = 1).

    With tau = r^2/2:

        kappa_11(r) = [(sinh^2 tau + tau^2) cosh tau - 2 tau sinh tau] / sinh^3 tau

    Short distances follow the repulsion law r^2/2 + O(r^6) and the curve
    decorrelates to 1 exponentially; both ends are asserted in the tests and
    the full curve is validated against Monte Carlo in the acceptance suite.
    """
    r = np.asarray(r, dtype=float)
    tau = 0.5 * r * r
    small = tau < 1e-4
    ts = np.where(small, 1.0, tau)
    sh, ch = np.sinh(ts), np.cosh(ts)
    val = ((sh * sh + ts * ts) * ch - 2.0 * ts * sh) / sh ** 3
    out = np.where(small, tau, val)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Finite-N conditional density
# ---------------------------------------------------------------------------


def _lap_g_log_one_minus_p2(degree: int, d):
    """Metric Laplacian of log(1 - P_N(.,p)^2) at geodesic distance d.

    Closed form on the projective line (q = cos^{2N} d, u = 1 - q):

        Lap_g = 4 N c^{2N-2} (c^2 - N s^2) / u - (2 N c^{2N-1} s / u)^2

    obtained by folding the cot(2d) first-derivative term into the second
    derivative; regular on (0, pi/2].
    """
    n = degree
    d = np.asarray(d, dtype=float)
    c, s = np.cos(d), np.sin(d)
    logc = np.log(c)
    u = -np.expm1(2.0 * n * logc)
    cpow2 = np.exp((2.0 * n - 2.0) * logc)
    fp = 2.0 * n * cpow2 * c * s / u
    return 4.0 * n * cpow2 * (c * c - n * s * s) / u - fp * fp


def conditional_density_finiteN(spec: EnsembleSpec, p: complex, z: complex) -> float:
    """Density of the conditional expected zero measure at z given a zero
    at p, with respect to the metric area form (delta mass at p excluded).

    Projective line: N/pi + (1/4 pi) Lap_g log(1 - P_N(z,p)^2) against the
    Fubini-Study area.  Bargmann-Fock is the scaling fixed point, where the
    expression collapses exactly to kappa_1^cond(|z-p|)/pi against Lebesgue.
    """
    z, p = complex(z), complex(p)
    if z == p:
        raise ValueError("conditional density excludes the conditioning point "
                         "(point mass); evaluate at z != p")
    if spec.model == BARGMANN_FOCK:
        return kappa_cond(1, abs(z - p)) / math.pi
    d = fs_distance(z, p)
    n = spec.degree
    val = n / math.pi + _lap_g_log_one_minus_p2(n, d) / (4.0 * math.pi)
    return max(float(val), 0.0)


# ---------------------------------------------------------------------------
# Smooth compactly supported test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FsRadialBump:
    """Smooth bump, radial in Fubini-Study distance about ``center``.

    kind = "bump":           h(x) = exp(-x/(1-x)),      h(0) = 1, h'(0) = -1
    kind = "zero_laplacian": h(x) = exp(-x^2/(1-x)),    h'(0) = 0

    with x = (d/R)^2, supported in the geodesic ball of radius R.  The
    second kind has vanishing Laplacian at the center (its correction
    integral must be o(N^{-1})).
    """

    center: complex = 0j
    radius: float = 0.5
    amplitude: float = 1.0
    kind: str = "bump"

    def __post_init__(self):
        if not 0 < self.radius < math.pi / 2:
            raise ValueError("radius must lie in (0, pi/2)")
        if self.kind not in ("bump", "zero_laplacian"):
            raise ValueError(self.kind)

    def _h(self, x):
        # clamp just inside the support edge: the profile and both
        # derivatives underflow to exactly 0 there anyway
        x = np.minimum(np.asarray(x, dtype=float), 1.0 - 1e-9)
        om = 1.0 - x
        if self.kind == "bump":
            h = np.exp(-x / om)
            h1 = -h / om ** 2
            h2 = h * (1.0 / om ** 4 - 2.0 / om ** 3)
        else:
            h = np.exp(-x * x / om)
            u1 = -x * (2.0 - x) / om ** 2
            u2 = -2.0 / om ** 3
            h1 = h * u1
            h2 = h * (u2 + u1 * u1)
        return h, h1, h2

    def value_fs(self, d):
        """Value at geodesic distance d from the center."""
        d = np.asarray(d, dtype=float)
        x = (d / self.radius) ** 2
        h, _, _ = self._h(np.minimum(x, 1.0))
        return self.amplitude * np.where(x < 1.0, h, 0.0)

    def value(self, z):
        return self.value_fs(_fs_distance_vec(z, self.center))

    def lap_metric_fs(self, d):
        """Metric Laplacian Lap_g phi at geodesic distance d (radial form
        phi'' + 2 cot(2d) phi')."""
        d = np.asarray(d, dtype=float)
        x = (d / self.radius) ** 2
        inside = x < 1.0
        h, h1, h2 = self._h(np.minimum(x, 1.0))
        rr = self.radius ** 2
        phi_d = h1 * 2.0 * d / rr
        phi_dd = h2 * (2.0 * d / rr) ** 2 + h1 * 2.0 / rr
        small = d < 1e-7
        with np.errstate(invalid="ignore", divide="ignore"):
            cot = np.where(small, 0.0, np.cos(2.0 * d) / np.sin(2.0 * d))
        lap = np.where(small, 4.0 * h1 / rr, phi_dd + 2.0 * cot * phi_d)
        out = self.amplitude * np.where(inside, lap, 0.0)
        return float(out) if out.ndim == 0 else out

    def ddbar_over_volume_at_center(self) -> float:
        """(i ddbar phi / Omega_M) at the center = Lap_g phi / 2 there."""
        _, h1, _ = self._h(np.asarray(0.0))
        return float(2.0 * self.amplitude * h1 / self.radius ** 2)

    def ddbar_density(self, z):
        """(i ddbar phi) against the Euclidean chart area at z."""
        z = np.asarray(z, dtype=complex)
        d = _fs_distance_vec(z, self.center)
        conf = (1.0 + np.abs(z) ** 2) ** 2
        out = 0.5 * self.lap_metric_fs(d) / conf
        return float(out) if np.ndim(z) == 0 else out


def _fs_distance_vec(z, w):
    z = np.asarray(z, dtype=complex)
    w = complex(w)
    return np.arctan2(np.abs(z - w), np.abs(1.0 + z * np.conj(w)))


# ---------------------------------------------------------------------------
# Unscaled correction integral
# ---------------------------------------------------------------------------


def _lambda_projective_vec(degree, z, w):
    """-log P_N(z, w) via the cancellation-free sine form (cf. kernels)."""
    z = np.asarray(z, dtype=complex)
    w = complex(w)
    a = np.abs(1.0 + z * np.conj(w))
    b = np.abs(z - w)
    s2 = (b / np.hypot(a, b)) ** 2
    with np.errstate(divide="ignore"):
        return np.where(s2 >= 1.0, np.inf, -0.5 * degree * np.log1p(-np.minimum(s2, 1.0)))


def _log_one_minus_sum_p2(spec, z, points):
    lams = np.stack([_lambda_projective_vec(spec.degree, z, p) for p in points])
    p2 = np.exp(-2.0 * lams)
    # expm1 on the nearest point keeps 1 - P^2 accurate right up to the
    # conditioning points (where it vanishes like 2 lambda)
    k = np.argmin(lams, axis=0)[None, ...]
    lam_near = np.take_along_axis(lams, k, axis=0)[0]
    rest = p2.sum(axis=0) - np.take_along_axis(p2, k, axis=0)[0]
    val = -np.expm1(-2.0 * lam_near) - rest
    if np.any(val <= 0.0):
        raise ValueError("sum of P_N^2 reached 1: conditioning points degenerate here")
    return np.log(val)


def unscaled_correction(spec: EnsembleSpec, points, phi, rel_tol: float = 1e-9) -> float:
    """Correction integral int_M log(1 - sum_j P_N(z,p_j)^2) (i/2pi) ddbar phi.

    This is the exact shift of the expected zero pairing produced by
    conditioning on vanishing at one point; for several well-separated
    points the overlap corrections are exponentially small in N.  ``phi``
    is an ``FsRadialBump`` or a sequence of them (their sum is the test
    function).  N times the result converges to
    -(pi^2/12) * sum_j (i ddbar phi(p_j) / Omega_M(p_j)) for the projective
    line, with remainder one power of N down.

    Single point at the bump center integrates by adaptive 1-D radial
    quadrature; otherwise a refined Fubini-Study polar grid around each
    bump is used.  Raises ``QuadratureError`` if refinement stalls.
    """
    if spec.model != PROJECTIVE_LINE:
        raise ValueError("the correction law applies to the compact model; "
                         "see flat_model_log_integral for the Bargmann-Fock check")
    if isinstance(phi, FsRadialBump):
        bumps = [phi]
    else:
        bumps = list(phi)
    pts = [complex(p) for p in (points if isinstance(points, (list, tuple, np.ndarray)) else [points])]

    total = 0.0
    for bump in bumps:
        if len(pts) == 1 and pts[0] == bump.center:
            total += _correction_radial(spec, pts[0], bump, rel_tol)
        else:
            total += _correction_polar(spec, pts, bump, rel_tol)
    return total


def _correction_radial(spec, p, bump, rel_tol):
    n = spec.degree

    def integrand(d):
        logu = np.log(-np.expm1(2.0 * n * np.log(np.cos(d))))
        return 0.25 * logu * bump.lap_metric_fs(d) * np.sin(2.0 * d)

    val, err = quad(integrand, 0.0, bump.radius, limit=400,
                    epsabs=1e-13, epsrel=1e-11)
    if abs(err) > max(1e-6 * abs(val), 1e-9):
        raise QuadratureError("radial correction quadrature did not converge",
                              [val, err])
    return val


def _correction_polar(spec, pts, bump, rel_tol):
    estimates = []
    for n_ang in (64, 128, 256, 512):
        estimates.append(_correction_polar_once(spec, pts, bump, n_ang))
        if len(estimates) > 1:
            a, b = estimates[-2], estimates[-1]
            if abs(a - b) <= rel_tol * max(abs(b), 1e-300) + 1e-14:
                return b
    raise QuadratureError("polar correction quadrature did not converge", estimates)


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _radial_panels(radius, n_levels=40):
    """Gauss panels geometrically refined toward d = 0 (log singularity)."""
    edges = radius * 2.0 ** (-np.arange(n_levels + 1, dtype=float))
    ds, ws = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        ds.append(mid + half * _GAUSS_NODES)
        ws.append(half * _GAUSS_WEIGHTS)
    # innermost sliver [0, edges[-1]] contributes O(d^2 log d): drop it
    return np.concatenate(ds), np.concatenate(ws)


def _correction_polar_once(spec, pts, bump, n_ang):
    d, wd = _radial_panels(bump.radius)
    theta = 2.0 * math.pi * np.arange(n_ang) / n_ang
    u = np.tan(d)[:, None] * np.exp(1j * theta)[None, :]
    c = complex(bump.center)
    z = (c + u) / (1.0 - np.conj(c) * u)
    logterm = _log_one_minus_sum_p2(spec, z, pts)
    radial_factor = 0.125 / math.pi * bump.lap_metric_fs(d) * np.sin(2.0 * d) * wd
    return float(np.sum(logterm, axis=1) @ radial_factor) * (2.0 * math.pi / n_ang)


def correction_target(points, bumps) -> float:
    """Limit of N x correction: -(pi^2/12) sum_j i ddbar phi(p_j)/Omega(p_j)."""
    if isinstance(bumps, FsRadialBump):
        bumps = [bumps]
    pts = [complex(p) for p in (points if isinstance(points, (list, tuple, np.ndarray)) else [points])]
    c1 = math.pi ** 2 / 12.0
    total = 0.0
    for p in pts:
        for b in bumps:
            d = fs_distance(p, b.center)
            total += float(0.5 * b.lap_metric_fs(d))
    return -c1 * total


def flat_model_log_integral() -> float:
    """int_C log(1 - e^{-|u|^2}) dA = -pi^3/6 (radial quadrature)."""
    val, _ = quad(lambda t: math.log(-math.expm1(-t)), 0.0, 60.0,
                  limit=300, epsabs=1e-13, epsrel=1e-12)
    return math.pi * val


# ---------------------------------------------------------------------------
# Joint probability density of all N zeros (small N)
# ---------------------------------------------------------------------------

MAX_JOINT_N = 12


def fs_area_quadrature(n_radial: int, n_angular: int):
    """Nodes z and weights w with sum w f(z) ~ int_{CP1} f dA_FS."""
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    d = 0.25 * math.pi * (x + 1.0)
    wd = 0.25 * math.pi * wx * 0.5 * np.sin(2.0 * d)
    theta = 2.0 * math.pi * np.arange(n_angular) / n_angular
    z = np.tan(d)[:, None] * np.exp(1j * theta)[None, :]
    w = np.broadcast_to(wd[:, None], z.shape) * (2.0 * math.pi / n_angular)
    return z.ravel(), w.ravel()


def joint_zero_density_unnormalized(n: int, zeros, rel_tol: float = 1e-9) -> float:
    """Unnormalised joint density of the full zero configuration.

    |Vandermonde(zeros)|^2 divided by the (N+1)-st power of
    int_{CP1} prod_j |z - zeta_j|^2 (1+|z|^2)^{-N} dnu(z), with dnu the
    unit-mass Fubini-Study measure.  The configuration-space normalising
    constant is deliberately omitted; only ratios are meaningful.
    """
    zeros = np.asarray([complex(x) for x in zeros])
    if len(zeros) != n:
        raise ValueError("need exactly N zeros")
    if n > MAX_JOINT_N:
        raise ValueError(f"joint density supported for N <= {MAX_JOINT_N}")
    if not np.all(np.isfinite(zeros.view(float))):
        raise ValueError("zeros must be finite")

    diffs = zeros[:, None] - zeros[None, :]
    iu = np.triu_indices(n, k=1)
    pair = np.abs(diffs[iu])
    if np.any(pair == 0.0):
        return 0.0
    log_vdm2 = 2.0 * float(np.sum(np.log(pair)))

    estimates = []
    for n_rad in (64, 128, 256, 512):
        estimates.append(_inner_integral_log(n, zeros, n_rad, 2 * n_rad))
        if len(estimates) > 1 and abs(estimates[-1] - estimates[-2]) <= rel_tol:
            log_i = estimates[-1]
            return math.exp(log_vdm2 - (n + 1) * log_i)
    raise QuadratureError("joint-density inner integral did not converge", estimates)


def _inner_integral_log(n, zeros, n_rad, n_ang):
    z, w = fs_area_quadrature(n_rad, n_ang)
    logf = -n * np.log1p(np.abs(z) ** 2)
    for zeta in zeros:
        logf += 2.0 * np.log(np.abs(z - zeta))
    shift = float(logf.max())
    # dnu = dA_FS / pi
    val = float(np.dot(w, np.exp(logf - shift))) / math.pi
    return shift + math.log(val)
