"""Complex linear algebra kernels: Takagi factorization, Hermitian spectra,
unitary exponentials and the standard anti-Hermitian generator basis.

All routines operate on numpy arrays.  Matrices serialized to JSON use
row-major nested lists of (re, im) pairs; see matrix_to_json / matrix_from_json.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    NotAntiHermitian,
    NotHermitian,
    NotSymmetric,
    ShapeMismatch,
)

# Relative gap below which singular values are treated as a degenerate
# cluster.  Above this the per-column phase correction is accurate to
# ~1e-10; below it the cluster is re-solved exactly (see _fix_cluster).
_CLUSTER_GAP = 1e-6
_ZERO_TOL = 1e-12


def _norm(m) -> float:
    return float(np.linalg.norm(m))


@dataclass(frozen=True)
class TakagiFactors:
    """Factorization a = q @ diag(mu) @ q.T with q unitary and mu >= 0 ascending."""

    q: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        n = self.q.shape[0]
        if self.q.shape != (n, n) or self.mu.shape != (n,):
            raise ShapeMismatch("q must be square and mu of matching length")
        if np.any(self.mu < -1e-12) or np.any(np.diff(self.mu) < -1e-10):
            raise ValueError("mu must be nonnegative and ascending")
        uerr = _norm(self.q.conj().T @ self.q - np.eye(n))
        if uerr > 1e-8:
            raise ValueError(f"q is not unitary (residual {uerr:.2e})")

    def reconstruct(self) -> np.ndarray:
        return (self.q * self.mu) @ self.q.T


def hermitian_eigenvalues(h: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    Raises NotHermitian if ||h - h^dagger|| exceeds tol * max(1, ||h||),
    ConvergenceFailure if the underlying solver fails.
    """
    h = np.asarray(h, dtype=complex)
    if _norm(h - h.conj().T) > tol * max(1.0, _norm(h)):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    try:
        return np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise ConvergenceFailure(str(exc)) from exc


def is_positive_definite(h: np.ndarray, tol: float = 0.0) -> bool:
    """True iff the Hermitian matrix h has smallest eigenvalue > tol."""
    return bool(hermitian_eigenvalues(h)[0] > tol)


def _canonical_column_signs(q: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-modulus entry of each column has
    positive real part (positive imaginary part on a real-part tie).

    Sign flips leave q @ diag(mu) @ q.T unchanged; this just makes the
    factorization output deterministic.
    """
    idx = np.argmax(np.abs(q), axis=-2)
    lead = np.take_along_axis(q, idx[..., None, :], axis=-2)[..., 0, :]
    re, im = lead.real, lead.imag
    flip = (re < 0) | ((np.abs(re) <= 1e-12 * np.abs(lead)) & (im < 0))
    return np.where(flip[..., None, :], -q, q)


def _coneig_block(b: np.ndarray):
    """Takagi vectors of a small complex symmetric block via the real
    symmetric embedding [[X, Y], [Y, -X]] of b = X + iY.

    Eigenpairs (mu, [u; v]) with mu >= 0 give con-eigenvectors p = u + iv
    satisfying b @ conj(p) = mu * p exactly (up to roundoff), with no loss
    of accuracy at degenerate mu.
    """
    m = b.shape[0]
    x, y = b.real, b.imag
    emb = np.block([[x, y], [y, -x]])
    w, vecs = np.linalg.eigh(emb)
    mu = np.clip(w[m:], 0.0, None)
    p = vecs[:m, m:] + 1j * vecs[m:, m:]
    return mu, p


def _fix_cluster(a, q, mu, lo, hi):
    """Re-solve columns lo:hi of a phase-corrected Takagi candidate.

    Within a degenerate cluster the eigenvectors of a^dagger a mix freely,
    so the per-column phase correction cannot diagonalize the restriction.
    The symmetric restriction b is re-factorized through _coneig_block,
    which is exact for repeated singular values.  Near-zero clusters are
    left as-is: any orthonormal basis of the near-kernel is valid.
    """
    scale = 1.0 + float(mu[-1])
    if mu[hi - 1] <= _ZERO_TOL * scale:
        return
    qc = q[:, lo:hi]
    b = qc.conj().T @ a @ qc.conj()
    mu_c, p = _coneig_block(b)
    q[:, lo:hi] = qc @ p
    mu[lo:hi] = mu_c


def _takagi_single(a: np.ndarray):
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0), complex), np.zeros(0)
    w, vecs = np.linalg.eigh(a.conj().T @ a)
    mu = np.sqrt(np.clip(w, 0.0, None))
    qt = vecs.conj()
    # phase correction: the diagonal of qt^dagger a conj(qt) is mu * e^{i phi}
    d = np.einsum("rj,rs,sj->j", qt.conj(), a, qt.conj())
    phase = np.where(np.abs(d) > 1e-300, np.exp(0.5j * np.angle(d)), 1.0)
    q = qt * phase
    scale = 1.0 + float(mu[-1])
    gaps = np.diff(mu)
    j = 0
    while j < n:
        k = j
        while k + 1 < n and gaps[k] < _CLUSTER_GAP * scale:
            k += 1
        if k > j:
            _fix_cluster(a, q, mu, j, k + 1)
        j = k + 1
    return _canonical_column_signs(q), mu


def _takagi_batch(a: np.ndarray):
    """Takagi factorization of a stack (..., n, n) of complex symmetric
    matrices.  No symmetry validation; callers guarantee the input.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[-1]
    w, vecs = np.linalg.eigh(np.swapaxes(a.conj(), -1, -2) @ a)
    mu = np.sqrt(np.clip(w, 0.0, None))
    qt = vecs.conj()
    d = np.einsum("...rj,...rs,...sj->...j", qt.conj(), a, qt.conj())
    phase = np.where(np.abs(d) > 1e-300, np.exp(0.5j * np.angle(d)), 1.0)
    q = qt * phase[..., None, :]
    scale = 1.0 + mu[..., -1]
    clustered = np.any(np.diff(mu, axis=-1) < _CLUSTER_GAP * scale[..., None], axis=-1)
    if np.any(clustered):
        flat_a = a.reshape(-1, n, n)
        flat_q = q.reshape(-1, n, n)
        flat_mu = mu.reshape(-1, n)
        for i in np.nonzero(clustered.reshape(-1))[0]:
            qi, mi = _takagi_single(flat_a[i])
            flat_q[i] = qi
            flat_mu[i] = mi
    return _canonical_column_signs(q), mu


def takagi_decompose(a: np.ndarray, tol: float = 1e-10) -> TakagiFactors:
    """Takagi factorization a = q @ diag(mu) @ q.T of a complex symmetric
    matrix, with q unitary and mu the ascending singular values of a.

    Computed from the Hermitian eigendecomposition of a^dagger a followed
    by a per-column phase correction; degenerate singular-value clusters
    are re-solved through a real symmetric embedding of the restricted
    block, which stays exact when singular values collide.

    Raises NotSymmetric if ||a - a.T|| > tol * max(1, ||a||).
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch("expected a square matrix")
    if _norm(a - a.T) > tol * max(1.0, _norm(a)):
        raise NotSymmetric("matrix is not complex symmetric within tolerance")
    try:
        q, mu = _takagi_single(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise ConvergenceFailure(str(exc)) from exc
    return TakagiFactors(q=q, mu=mu)


def unitary_exp(x: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Matrix exponential of an anti-Hermitian x, exactly unitary up to
    roundoff (computed through the Hermitian eigendecomposition of i x).

    Raises NotAntiHermitian if ||x + x^dagger|| > tol * max(1, ||x||).
    """
    x = np.asarray(x, dtype=complex)
    if _norm(x + x.conj().T) > tol * max(1.0, _norm(x)):
        raise NotAntiHermitian("matrix is not anti-Hermitian within tolerance")
    w, vecs = np.linalg.eigh(1j * x)
    return (vecs * np.exp(-1j * w)) @ vecs.conj().T


def unitary_algebra_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of the anti-Hermitian n x n matrices under the
    inner product <A, B> = Re Tr(A B^dagger).

    Order: diagonal generators i E_kk for k = 1..n, then for k < l in
    lexicographic order the symmetric generators i (E_kl + E_lk)/sqrt(2),
    then the antisymmetric generators (E_lk - E_kl)/sqrt(2).
    """
    basis = []
    for k in range(n):
        m = np.zeros((n, n), complex)
        m[k, k] = 1j
        basis.append(m)
    for k in range(n):
        for l in range(k + 1, n):
            m = np.zeros((n, n), complex)
            m[k, l] = m[l, k] = 1j / np.sqrt(2)
            basis.append(m)
    for k in range(n):
        for l in range(k + 1, n):
            m = np.zeros((n, n), complex)
            m[l, k] = 1 / np.sqrt(2)
            m[k, l] = -1 / np.sqrt(2)
            basis.append(m)
    return basis


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested lists of (re, im) pairs."""
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ShapeMismatch("expected nested lists of (re, im) pairs")
    return arr[..., 0] + 1j * arr[..., 1]
