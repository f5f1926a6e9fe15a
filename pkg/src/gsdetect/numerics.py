"""Dense complex linear algebra for small Hermitian positive-definite systems.

Matrices are plain ``numpy`` complex arrays. The Hermitian system matrix of
the detectors is carried as a :class:`HermitianSplit` (diagonal + strictly
lower triangle), which is the storage the Gauss-Seidel sweep works on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NotPositiveDefiniteError",
    "SingularTriangularError",
    "HermitianSplit",
    "cholesky_factor",
    "cholesky_solve",
    "solve_lower",
    "solve_upper",
    "hermitian_matvec",
]

# relative pivot threshold for the Cholesky factorization
PIVOT_RTOL = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot is not safely positive."""


class SingularTriangularError(np.linalg.LinAlgError):
    """Raised when a triangular system has a zero diagonal entry."""


@dataclass(frozen=True)
class HermitianSplit:
    """Hermitian matrix stored as ``W = D + L + L^H``.

    Parameters
    ----------
    d : ndarray, shape (n,)
        Real diagonal of ``W``.
    lower : ndarray, shape (n, n)
        Strictly lower-triangular part ``L`` (entries on and above the
        diagonal are zero).
    """

    d: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        lower = np.tril(np.asarray(self.lower, dtype=complex), -1)
        if d.ndim != 1 or lower.shape != (d.size, d.size):
            raise ValueError(
                f"inconsistent split: d has shape {d.shape}, lower has shape {lower.shape}"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(lower))):
            raise ValueError("split contains non-finite entries")
        d.setflags(write=False)
        lower.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "lower", lower)

    @property
    def dimension(self) -> int:
        return self.d.size

    @property
    def upper(self) -> np.ndarray:
        """Strictly upper part ``L^H``."""
        return self.lower.conj().T

    @property
    def off_diagonal(self) -> np.ndarray:
        """``E = L + L^H``."""
        return self.lower + self.upper

    @classmethod
    def from_dense(cls, w) -> "HermitianSplit":
        """Split a dense matrix, using its diagonal and lower triangle only."""
        w = np.asarray(w)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {w.shape}")
        return cls(np.real(np.diag(w)).copy(), np.tril(w, -1))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.d).astype(complex) + self.lower + self.upper


def _as_dense(w) -> np.ndarray:
    if isinstance(w, HermitianSplit):
        return w.to_dense()
    w = np.asarray(w, dtype=complex)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    return w


def cholesky_factor(w) -> np.ndarray:
    """Lower Cholesky factor ``C`` with ``C C^H = W``.

    Only the diagonal and lower triangle of `w` are read.

    Parameters
    ----------
    w : HermitianSplit or array_like, shape (n, n)
        Hermitian positive-definite matrix.

    Returns
    -------
    c : ndarray, shape (n, n)
        Lower-triangular factor with real positive diagonal.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot falls below ``1e-12 * max(diag(W))``.
    """
    a = np.tril(_as_dense(w)).astype(complex)
    n = a.shape[0]
    scale = np.max(np.abs(np.real(np.diag(a)))) if n else 0.0
    threshold = PIVOT_RTOL * scale
    c = np.zeros_like(a)
    for j in range(n):
        row = c[j, :j]
        pivot = np.real(a[j, j]) - np.real(np.vdot(row, row))
        if not pivot > threshold:
            raise NotPositiveDefiniteError(
                f"matrix is not positive definite (pivot {j} = {pivot:.3e})"
            )
        cjj = np.sqrt(pivot)
        c[j, j] = cjj
        if j + 1 < n:
            c[j + 1:, j] = (a[j + 1:, j] - c[j + 1:, :j] @ row.conj()) / cjj
    return c


def solve_lower(c, b) -> np.ndarray:
    """Forward substitution for ``C x = b`` with ``C`` lower triangular.

    `b` may hold several right-hand sides as columns. Entries of `c` above the
    diagonal are ignored.
    """
    c = np.asarray(c)
    b = np.asarray(b)
    n = c.shape[0]
    if c.ndim != 2 or c.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {c.shape}")
    if b.shape[0] != n:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    diag = np.diag(c)
    if np.any(diag == 0):
        raise SingularTriangularError("singular triangular system (zero diagonal entry)")
    x = np.zeros(b.shape, dtype=np.result_type(c, b, float))
    for i in range(n):
        x[i] = (b[i] - c[i, :i] @ x[:i]) / diag[i]
    return x


def solve_upper(c, b) -> np.ndarray:
    """Back substitution for ``C x = b`` with ``C`` upper triangular."""
    c = np.asarray(c)
    b = np.asarray(b)
    # reversing rows and columns turns an upper system into a lower one
    return solve_lower(c[::-1, ::-1], b[::-1])[::-1]


def cholesky_solve(c, b) -> np.ndarray:
    """Solve ``C C^H x = b`` given the lower Cholesky factor ``C``."""
    c = np.asarray(c)
    return solve_upper(c.conj().T, solve_lower(c, b))


def hermitian_matvec(w: HermitianSplit, v) -> np.ndarray:
    """Return ``(D + L + L^H) v`` without forming the dense matrix."""
    v = np.asarray(v)
    if v.shape[0] != w.dimension:
        raise ValueError(f"vector has {v.shape[0]} rows, expected {w.dimension}")
    d = w.d.reshape((-1,) + (1,) * (v.ndim - 1))
    return d * v + w.lower @ v + w.upper @ v
