"""Orbit log-volume (entropy) field on the ordered radial chamber.

    S(sigma) = sum_k log sinh(sigma_k)
             + sum_{k<l} log |cosh(sigma_k) - cosh(sigma_l)|

S is permutation symmetric, so everything here accepts unordered (but
pairwise distinct, strictly positive) coordinate vectors, and works on
stacked inputs of shape (..., n).  A key identity, tested rather than
assumed: Delta S + |grad S|^2 = n (n+1) (2n+1) / 6 at every chamber point.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateSpectrum, OutOfChamber


def _as_sigma(sigma) -> np.ndarray:
    sigma = np.asarray(getattr(sigma, "sigma", sigma), dtype=float)
    if sigma.shape[-1] == 0:
        raise OutOfChamber("sigma must have at least one entry")
    return sigma


def _offdiag_mask(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


def _entropy_raw(sigma: np.ndarray) -> np.ndarray:
    """S(sigma) without error checking; -inf on collisions, nan off-domain."""
    n = sigma.shape[-1]
    c = np.cosh(sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sum(np.log(np.sinh(sigma)), axis=-1)
        if n > 1:
            diff = np.abs(c[..., :, None] - c[..., None, :])
            logd = np.where(_offdiag_mask(n), np.log(np.where(diff > 0, diff, 1.0)), 0.0)
            logd = np.where(_offdiag_mask(n) & (diff == 0), -np.inf, logd)
            val = val + 0.5 * np.sum(logd, axis=(-2, -1))
    return val


def _validate(sigma: np.ndarray, value: np.ndarray):
    if np.any(sigma <= 0):
        raise OutOfChamber("sigma entries must be strictly positive")
    if not np.all(np.isfinite(value)):
        raise DegenerateSpectrum("coincident sigma entries")


def entropy(sigma) -> float | np.ndarray:
    """S(sigma); float for a single coordinate vector, array for stacks."""
    sigma = _as_sigma(sigma)
    val = _entropy_raw(sigma)
    _validate(sigma, val)
    return float(val) if sigma.ndim == 1 else val


def _gradient_raw(sigma: np.ndarray) -> np.ndarray:
    """grad S without error checking; nan entries on collisions."""
    n = sigma.shape[-1]
    c, s = np.cosh(sigma), np.sinh(sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 1.0 / np.tanh(sigma)
        if n > 1:
            diff = c[..., :, None] - c[..., None, :]
            inv = np.where(_offdiag_mask(n), 1.0 / np.where(diff != 0, diff, np.inf), 0.0)
            bad = _offdiag_mask(n) & (diff == 0)
            inv = np.where(bad, np.nan, inv)
            g = g + s * np.sum(inv, axis=-1)
    return g


def entropy_gradient(sigma) -> np.ndarray:
    """Componentwise coth(sigma_k) + sum_{l != k} sinh(sigma_k) / (cosh(sigma_k) - cosh(sigma_l))."""
    sigma = _as_sigma(sigma)
    g = _gradient_raw(sigma)
    _validate(sigma, g)
    return g


def entropy_laplacian(sigma) -> float | np.ndarray:
    """Sum of the unmixed second derivatives of S (the flat Laplacian):

        sum_k [ -1/sinh^2(sigma_k)
                + sum_{l != k} ( cosh(sigma_k) / d_kl - sinh^2(sigma_k) / d_kl^2 ) ]

    with d_kl = cosh(sigma_k) - cosh(sigma_l).
    """
    sigma = _as_sigma(sigma)
    n = sigma.shape[-1]
    c, s = np.cosh(sigma), np.sinh(sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sum(-1.0 / s**2, axis=-1)
        if n > 1:
            diff = c[..., :, None] - c[..., None, :]
            safe = np.where(diff != 0, diff, np.inf)
            term = c[..., :, None] / safe - (s**2)[..., :, None] / safe**2
            term = np.where(_offdiag_mask(n), term, 0.0)
            term = np.where(_offdiag_mask(n) & (diff == 0), np.nan, term)
            val = val + np.sum(term, axis=(-2, -1))
    _validate(sigma, val)
    return float(val) if sigma.ndim == 1 else val


def log_cosh_norm(sigma) -> float | np.ndarray:
    """N(sigma) = log sum_k cosh(sigma_k), a smooth norm-like growth gauge."""
    sigma = _as_sigma(sigma)
    val = np.log(np.sum(np.cosh(sigma), axis=-1))
    return float(val) if sigma.ndim == 1 else val


def bump(x) -> float | np.ndarray:
    """Smooth plateau: 1 on x <= 1, 0 on x >= 2, and on (1, 2)

        q(2 - x) / (q(2 - x) + q(x - 1)),   q(t) = exp(-1/t),

    which is C^infinity with bump(1.5) = 1/2."""
    scalar = np.asarray(x).ndim == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.ones_like(arr)
    out[arr >= 2.0] = 0.0
    out[np.isnan(arr)] = np.nan
    mid = (arr > 1.0) & (arr < 2.0)
    if np.any(mid):
        t = arr[mid]
        qa = np.exp(-1.0 / (2.0 - t))
        qb = np.exp(-1.0 / (t - 1.0))
        out[mid] = qa / (qa + qb)
    return float(out[0]) if scalar else out


def cutoff_eta(sigma, k: float, big_k: float) -> float | np.ndarray:
    """Smooth well-posedness cutoff eta = bump(-S/k) * bump(N/big_k).

    Equal to one on the plateau {S >= -k, N <= big_k}; vanishes once
    S <= -2k (near chamber walls, where S -> -inf) or N >= 2 big_k
    (far out).  Off-chamber states get eta = 0 rather than an error.
    """
    if k <= 0 or big_k <= 0:
        raise ValueError("cutoff scales must be positive")
    sigma = _as_sigma(sigma)
    s_val = _entropy_raw(sigma)
    n_val = np.log(np.sum(np.cosh(sigma), axis=-1))
    with np.errstate(invalid="ignore"):
        eta = np.asarray(bump(-s_val / k) * bump(n_val / big_k))
    eta = np.where(np.isfinite(eta), eta, 0.0)
    if np.any(sigma <= 0):
        eta = np.where(np.any(sigma <= 0, axis=-1), 0.0, eta)
    return float(eta) if sigma.ndim == 1 else eta
