"""Truncated spectral factorization of the symmetric log co-occurrence matrix.

The matrix is symmetric but not necessarily positive semidefinite, so the
top-rank singular triples are found by orthogonal (block power) iteration on
A @ A: its eigenvalues are the squared singular values of A, and the iterate
converges to the dominant singular subspace.  A final Rayleigh-Ritz step on A
itself recovers signed eigenvalues, giving sigma = |lambda| together with the
sign needed to reconstruct the optimal rank-k approximation when A is
indefinite (U diag(sigma * sign) U^T is then exactly U Sigma V^T with
V = U diag(sign)).

The iteration uses an oversampled block and full re-orthonormalization per
step; matrices up to a couple thousand rows are the intended scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingMatrix


@dataclass
class SvdFactorization:
    """Top-rank factors of a symmetric matrix.

    Columns of ``u`` are orthonormal; ``sigma`` is nonnegative and
    nonincreasing; ``signs`` carries the sign of the corresponding
    eigenvalue of the (symmetric) input.
    """

    u: np.ndarray
    sigma: np.ndarray
    signs: np.ndarray

    @property
    def rank(self) -> int:
        return self.sigma.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Best rank-k approximation of the factored matrix."""
        return (self.u * (self.sigma * self.signs)) @ self.u.T


def _as_dense_symmetric(a) -> np.ndarray:
    if isinstance(a, np.ndarray):
        mat = np.asarray(a, dtype=float)
    else:
        mat = a.to_dense()
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("input must be a square matrix")
    if not np.array_equal(mat, mat.T):
        raise ValueError("input matrix is not symmetric")
    if not np.isfinite(mat).all():
        raise ValueError("input matrix has non-finite values")
    return mat


def truncated_svd(
    a,
    rank: int,
    seed: int = 0,
    tol: float = 1e-13,
    max_iter: int = 500,
    oversample: int = 8,
) -> SvdFactorization:
    """Top-``rank`` factors of a symmetric matrix by block power iteration.

    Accepts a dense symmetric ndarray or any object with a ``to_dense()``
    method (the sparse log co-occurrence matrix).  Deterministic for a fixed
    seed.
    """
    mat = _as_dense_symmetric(a)
    n = mat.shape[0]
    if not (1 <= rank <= n):
        raise ValueError(f"rank must be in 1..{n}, got {rank}")

    block = min(n, rank + oversample)
    rng = np.random.default_rng(seed)
    q = np.linalg.qr(rng.standard_normal((n, block)))[0]

    prev_est: np.ndarray | None = None
    for _ in range(max_iter):
        z = mat @ (mat @ q)
        if not np.isfinite(z).all():
            raise ValueError("iteration produced non-finite values")
        if np.linalg.norm(z) == 0.0:
            break  # zero matrix: any orthonormal basis works
        # Ritz estimates of sigma^2 on the current subspace
        m2 = q.T @ z
        s2 = np.linalg.eigvalsh((m2 + m2.T) / 2.0)[::-1]
        est = np.sqrt(np.clip(s2[:rank], 0.0, None))
        q = np.linalg.qr(z)[0]
        if prev_est is not None:
            denom = np.maximum(np.abs(prev_est), 1e-300)
            if np.max(np.abs(est - prev_est) / denom) < tol:
                break
        prev_est = est

    # Rayleigh-Ritz on A itself to recover signed eigenvalues
    m = q.T @ mat @ q
    lam, s = np.linalg.eigh((m + m.T) / 2.0)
    order = np.argsort(-np.abs(lam), kind="stable")[:rank]
    u = q @ s[:, order]
    sigma = np.abs(lam[order])
    signs = np.where(lam[order] < 0.0, -1.0, 1.0)
    return SvdFactorization(u=u, sigma=sigma, signs=signs)


def svd_embeddings(
    f: SvdFactorization,
    words: tuple[str, ...],
    scale_exponent: float = 0.0,
) -> EmbeddingMatrix:
    """Rows of U as word embeddings, optionally scaled by sigma^p per column.

    ``scale_exponent=0`` emits raw rows of U; positive exponents weight the
    components by their singular values.
    """
    if len(words) != f.u.shape[0]:
        raise ValueError("words length does not match factorization rows")
    scale = f.sigma ** scale_exponent
    return EmbeddingMatrix(
        words=tuple(words),
        input_vectors=f.u * scale,
        output_vectors=None,
        dim=f.rank,
        method="svd",
    )
