"""Batched Aberth-Ehrlich simultaneous root finding.

The Monte Carlo experiments spend essentially all their time here, so the
kernel is numba-jitted and parallelised over trials.  A pure-numpy fallback
applying the same correction formula (in Jacobi-style sweeps, vectorised
across the batch, where the jitted kernel updates in place) is selected by
setting ``ZEROCOND_DISABLE_NUMBA=1`` or when numba is unavailable; both
backends agree to polish accuracy and ``benchmarks/bench_backends.py``
compares their speed.

Polynomials are given by ascending-power complex coefficient rows, already
normalised so the largest coefficient magnitude is ~1 (roots are invariant
under scaling).  Evaluation switches to the reversed polynomial in 1/z for
|z| > 1, so no power of |z| beyond the first is ever formed:

    p(z)  = z^n q(1/z),   p/p' = z q(w) / (n q(w) - w q'(w)),  w = 1/z.

Both backends finish with uncoupled Newton polish and report the residual
|q| at each root in whichever chart the root lies.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

ABERTH_TOL = 1e-13
ABERTH_MAXIT = 120
POLISH_STEPS = 2

NUMBA_DISABLED = os.environ.get("ZEROCOND_DISABLE_NUMBA", "").strip() not in ("", "0", "false")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by ZEROCOND_DISABLE_NUMBA")
    from numba import njit, prange, set_num_threads

    # threading-layer version notices at backend init are environment noise
    warnings.filterwarnings("ignore", message=".*TBB.*")
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via env flag in tests
    NUMBA_AVAILABLE = False

_threads = os.environ.get("ZEROCOND_THREADS", "").strip()
if NUMBA_AVAILABLE and _threads:
    set_num_threads(max(1, int(_threads)))


def backend_name() -> str:
    return "numba" if NUMBA_AVAILABLE else "numpy"


def initial_guesses(n: int) -> np.ndarray:
    """Perturbed circle near the expected root modulus (~1 for the sphere
    ensembles); the wobble breaks symmetric stalls."""
    k = np.arange(n)
    ang = 2.0 * np.pi * (k + 0.37) / n + 0.5 / n
    radius = 1.0 + 0.06 * np.cos(7.0 * ang + 0.9)
    return radius * np.exp(1j * ang)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _ratio_and_val(coef, rcoef, n, z):
        """(p/p', |q| in the active chart) with the two-chart evaluation."""
        if abs(z) <= 1.0:
            pv = coef[n]
            dv = 0.0 + 0.0j
            for k in range(n - 1, -1, -1):
                dv = dv * z + pv
                pv = pv * z + coef[k]
            if dv == 0.0:
                return 0.0 + 0.0j, abs(pv), pv == 0.0
            return pv / dv, abs(pv), False
        w = 1.0 / z
        qv = rcoef[n]
        qd = 0.0 + 0.0j
        for k in range(n - 1, -1, -1):
            qd = qd * w + qv
            qv = qv * w + rcoef[k]
        den = n * qv - w * qd
        if den == 0.0:
            return 0.0 + 0.0j, abs(qv), qv == 0.0
        return z * qv / den, abs(qv), False

    @njit(cache=True, parallel=True)
    def _aberth_batch_numba(coefs, init, maxit, tol, polish_steps):
        nbatch, d = coefs.shape
        n = d - 1
        roots = np.empty((nbatch, n), np.complex128)
        resid = np.empty((nbatch, n), np.float64)
        iters = np.zeros(nbatch, np.int64)
        converged = np.zeros(nbatch, np.bool_)
        for b in prange(nbatch):
            coef = coefs[b]
            rcoef = coef[::-1].copy()
            z = init.copy()
            frozen = np.zeros(n, np.bool_)
            ok = False
            for it in range(maxit):
                moved = False
                for i in range(n):
                    if frozen[i]:
                        continue
                    zi = z[i]
                    ratio, _, exact = _ratio_and_val(coef, rcoef, n, zi)
                    if exact:
                        frozen[i] = True
                        continue
                    ssum = 0.0 + 0.0j
                    for j in range(n):
                        if j != i:
                            ssum += 1.0 / (zi - z[j])
                    denom = 1.0 - ratio * ssum
                    if denom == 0.0:
                        continue
                    delta = ratio / denom
                    z[i] = zi - delta
                    if abs(delta) <= tol * (1.0 + abs(z[i])):
                        frozen[i] = True
                    else:
                        moved = True
                if not moved:
                    ok = True
                    iters[b] = it + 1
                    break
            if not ok:
                iters[b] = maxit
            for i in range(n):
                for _ in range(polish_steps):
                    ratio, _, exact = _ratio_and_val(coef, rcoef, n, z[i])
                    if exact:
                        break
                    z[i] = z[i] - ratio
                _, qabs, _ = _ratio_and_val(coef, rcoef, n, z[i])
                resid[b, i] = qabs
            roots[b] = z
            converged[b] = ok
        return roots, resid, iters, converged

    def aberth_batch_numba(coefs, maxit=ABERTH_MAXIT, tol=ABERTH_TOL,
                           polish_steps=POLISH_STEPS):
        coefs = np.ascontiguousarray(coefs, dtype=np.complex128)
        init = initial_guesses(coefs.shape[1] - 1)
        return _aberth_batch_numba(coefs, init, maxit, tol, polish_steps)

else:  # pragma: no cover

    def aberth_batch_numba(*args, **kwargs):
        raise RuntimeError("numba backend unavailable")


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------


def _ratio_and_val_numpy(coefs, rcoefs, z):
    """Vectorised two-chart p/p' for a (B, n) matrix of iterates."""
    n = coefs.shape[1] - 1
    outer = np.abs(z) > 1.0
    zin = np.where(outer, 0.0, z)
    w = np.where(outer, 1.0 / np.where(z == 0.0, 1.0, z), 0.0)

    pv = np.broadcast_to(coefs[:, n, None], z.shape).copy()
    dv = np.zeros_like(z)
    qv = np.broadcast_to(rcoefs[:, n, None], z.shape).copy()
    qd = np.zeros_like(z)
    for k in range(n - 1, -1, -1):
        dv = dv * zin + pv
        pv = pv * zin + coefs[:, k, None]
        qd = qd * w + qv
        qv = qv * w + rcoefs[:, k, None]
    den_out = n * qv - w * qd
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_in = np.where(dv == 0.0, 0.0, pv / np.where(dv == 0.0, 1.0, dv))
        ratio_out = np.where(den_out == 0.0, 0.0,
                             z * qv / np.where(den_out == 0.0, 1.0, den_out))
    ratio = np.where(outer, ratio_out, ratio_in)
    val = np.where(outer, np.abs(qv), np.abs(pv))
    return ratio, val


def aberth_batch_numpy(coefs, maxit=ABERTH_MAXIT, tol=ABERTH_TOL,
                       polish_steps=POLISH_STEPS):
    coefs = np.ascontiguousarray(coefs, dtype=np.complex128)
    nbatch, d = coefs.shape
    n = d - 1
    rcoefs = coefs[:, ::-1].copy()
    z = np.broadcast_to(initial_guesses(n), (nbatch, n)).copy()
    frozen = np.zeros((nbatch, n), dtype=bool)
    iters = np.full(nbatch, maxit, dtype=np.int64)
    converged = np.zeros(nbatch, dtype=bool)
    for it in range(maxit):
        ratio, _ = _ratio_and_val_numpy(coefs, rcoefs, z)
        diff = z[:, :, None] - z[:, None, :]
        np.einsum("bii->bi", diff)[...] = 1.0
        ssum = (1.0 / diff).sum(axis=2) - 1.0
        denom = 1.0 - ratio * ssum
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = np.where(denom == 0.0, 0.0, ratio / np.where(denom == 0.0, 1.0, denom))
        delta = np.where(frozen, 0.0, delta)
        z = z - delta
        newly = np.abs(delta) <= tol * (1.0 + np.abs(z))
        frozen |= newly
        done = frozen.all(axis=1) & ~converged
        iters[done] = it + 1
        converged |= done
        if converged.all():
            break
    for _ in range(polish_steps):
        ratio, _ = _ratio_and_val_numpy(coefs, rcoefs, z)
        z = z - ratio
    _, resid = _ratio_and_val_numpy(coefs, rcoefs, z)
    return z, resid, iters, converged


def aberth_batch(coefs, maxit=ABERTH_MAXIT, tol=ABERTH_TOL,
                 polish_steps=POLISH_STEPS):
    """Roots of each coefficient row; returns (roots, residuals, iters,
    converged) using the selected backend."""
    if NUMBA_AVAILABLE:
        return aberth_batch_numba(coefs, maxit, tol, polish_steps)
    return aberth_batch_numpy(coefs, maxit, tol, polish_steps)
