"""Soft-output linear MMSE detectors for the massive-MIMO uplink.

The system matrix is the regularized Gram matrix ``W = H^H H + N0 I`` split
as ``W = D + L + L^H``; the right-hand side is the matched-filter output
``y_mf = H^H y``. Detectors differ only in how they approximate
``W^{-1} y_mf``:

* :func:`igs_detect` -- two-term Neumann start ``(D^-1 - D^-1 E D^-1) y_mf``
  followed by ``k`` Gauss-Seidel sweeps.
* :func:`gs_detect` -- Gauss-Seidel from a zero, diagonal or Neumann start.
* :func:`nse_detect` -- truncated Neumann series with ``X = D``.
* :func:`exact_mmse_detect` -- Cholesky solve.

All of them end in the same LLR stage: ``z_i = s_hat_i / mu_i``, SINR
``rho_i = mu_i / (1 - mu_i)`` and ``L_ib = rho_i * lambda_b(z_i)``. The
SINR form relies on the MMSE identity ``nu_i^2 = mu_i (1 - mu_i)`` for the
noise-plus-interference variance. The iterative detectors use the
approximate gains ``mu_i = 1 - N0 [W_2^-1]_ii``; the exact detector uses
the diagonal of ``I - N0 W^-1``.

Every detector accepts an optional :class:`MultCounter` that tallies
complex multiplications per received vector.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .modem import Constellation, bit_metrics
from .numerics import (
    HermitianSplit,
    cholesky_factor,
    cholesky_solve,
    solve_lower,
)

__all__ = [
    "GAIN_EPS",
    "GainOutOfRangeError",
    "MultCounter",
    "GramSystem",
    "Nse2Inverse",
    "DetectionResult",
    "preprocess",
    "nse2_inverse",
    "initial_solution",
    "gs_iterate",
    "gs_detect",
    "igs_detect",
    "nse_detect",
    "exact_mmse_detect",
    "soft_output",
]

# gains are clamped to [GAIN_EPS, 1 - GAIN_EPS] before the SINR division
GAIN_EPS = 1e-6

INIT_MODES = ("zero", "diag", "nse2")


class GainOutOfRangeError(ArithmeticError):
    """An effective channel gain fell outside ``[0, 1]``."""


class MultCounter:
    """Tally of complex multiplications, grouped by processing stage."""

    def __init__(self):
        self.stages = Counter()

    def add(self, stage: str, count: int):
        self.stages[stage] += int(count)

    @property
    def total(self) -> int:
        return sum(self.stages.values())

    def core(self) -> int:
        """Multiplications excluding the gain computation."""
        return self.total - self.stages.get("gain", 0)

    def __repr__(self):
        return f"MultCounter({dict(self.stages)})"


def _count(counter, stage, n):
    if counter is not None:
        counter.add(stage, n)


@dataclass(frozen=True)
class GramSystem:
    """Regularized Gram matrix split plus matched-filter output.

    `y_mf` has shape ``(n_t,)`` or ``(n_t, T)`` when ``T`` received vectors
    share one channel realization.
    """

    split: HermitianSplit
    y_mf: np.ndarray
    n0: float
    n_r: int

    def __post_init__(self):
        y = np.asarray(self.y_mf, dtype=complex)
        if y.shape[0] != self.split.dimension:
            raise ValueError(
                f"matched-filter output has {y.shape[0]} rows, expected {self.split.dimension}"
            )
        object.__setattr__(self, "y_mf", y)

    @property
    def n_t(self) -> int:
        return self.split.dimension

    @property
    def d(self) -> np.ndarray:
        return self.split.d

    @property
    def n_vectors(self) -> int:
        return 1 if self.y_mf.ndim == 1 else self.y_mf.shape[1]


@dataclass(frozen=True)
class Nse2Inverse:
    """Two-term Neumann approximation ``D^-1 - D^-1 E D^-1`` of ``W^-1``."""

    w2_inv: np.ndarray
    diag: np.ndarray
    d_inv: np.ndarray


@dataclass(frozen=True)
class DetectionResult:
    """Equalizer output and soft bits.

    Attributes
    ----------
    s_hat : ndarray
        Equalized symbols, same shape as the matched-filter output.
    z : ndarray
        Gain-normalized symbols ``s_hat / mu``.
    mu : ndarray, shape (n_t,)
        Effective channel gains (after clamping).
    rho : ndarray, shape (n_t,)
        Post-equalization SINRs.
    llrs : ndarray, shape (n_t * B,) or (T, n_t * B)
        Bit LLRs, symbol-major per received vector.
    """

    s_hat: np.ndarray
    z: np.ndarray
    mu: np.ndarray
    rho: np.ndarray
    llrs: np.ndarray


def preprocess(ch: ChannelRealization, y) -> GramSystem:
    """Form ``W = H^H H + N0 I`` (lower triangle only) and ``y_mf = H^H y``."""
    h = ch.h
    y = np.asarray(y, dtype=complex)
    if y.shape[0] != ch.n_r:
        raise ValueError(f"receive vector has {y.shape[0]} rows, expected n_r={ch.n_r}")
    n_t = ch.n_t
    lower = np.zeros((n_t, n_t), dtype=complex)
    d = np.empty(n_t)
    for j in range(n_t):
        col = h[:, j]
        d[j] = np.real(np.vdot(col, col)) + ch.n0
        lower[j + 1:, j] = h[:, j + 1:].conj().T @ col
    return GramSystem(HermitianSplit(d, lower), h.conj().T @ y, ch.n0, ch.n_r)


def _diag_inverse(g: GramSystem) -> np.ndarray:
    d = g.d
    if np.any(d == 0):
        raise ZeroDivisionError("zero diagonal entry in the Gram matrix")
    return 1.0 / d


def nse2_inverse(g: GramSystem, counter: MultCounter | None = None) -> Nse2Inverse:
    """Two-term Neumann approximation of ``W^-1`` with ``X = D``.

    Only the lower triangle of ``D^-1 E D^-1`` is evaluated; the upper one is
    its conjugate mirror.
    """
    n = g.n_t
    d_inv = _diag_inverse(g)
    _count(counter, "nse2", n)
    rows, cols = np.tril_indices(n, -1)
    w2 = np.diag(d_inv).astype(complex)
    w2[rows, cols] = -(d_inv[rows] * g.split.lower[rows, cols]) * d_inv[cols]
    w2[cols, rows] = np.conj(w2[rows, cols])
    _count(counter, "nse2", 2 * rows.size)
    return Nse2Inverse(w2, d_inv.copy(), d_inv)


def _matvec(a, x, counter, stage, nnz):
    _count(counter, stage, nnz)
    return a @ x


def initial_solution(
    g: GramSystem,
    mode: str = "nse2",
    w2: Nse2Inverse | None = None,
    counter: MultCounter | None = None,
) -> np.ndarray:
    """Starting vector for Gauss-Seidel: ``0``, ``D^-1 y_mf`` or ``W_2^-1 y_mf``."""
    if mode == "zero":
        return np.zeros_like(g.y_mf)
    if mode == "diag":
        d_inv = _diag_inverse(g).reshape((-1,) + (1,) * (g.y_mf.ndim - 1))
        _count(counter, "init", g.n_t)
        return d_inv * g.y_mf
    if mode == "nse2":
        if w2 is None:
            w2 = nse2_inverse(g, counter)
        return _matvec(w2.w2_inv, g.y_mf, counter, "init", g.n_t**2)
    raise ValueError(f"unknown initial solution mode {mode!r}; choose from {INIT_MODES}")


def gs_iterate(g: GramSystem, s_prev, counter: MultCounter | None = None) -> np.ndarray:
    """One Gauss-Seidel sweep ``(D + L)^-1 (y_mf - L^H s_prev)``.

    The inverse is never formed; the sweep is a forward substitution.
    """
    s_prev = np.asarray(s_prev)
    if s_prev.shape != g.y_mf.shape:
        raise ValueError(f"iterate has shape {s_prev.shape}, expected {g.y_mf.shape}")
    n = g.n_t
    if np.any(g.d == 0):
        raise ZeroDivisionError("zero diagonal entry in the Gram matrix")
    tri = n * (n - 1) // 2
    b = g.y_mf - _matvec(g.split.upper, s_prev, counter, "gs", tri)
    # forward substitution: n(n-1)/2 products plus one reciprocal scaling per row
    _count(counter, "gs", tri + n)
    return solve_lower(np.diag(g.d) + g.split.lower, b)


def _gains_from_w2(g: GramSystem, w2: Nse2Inverse, counter) -> np.ndarray:
    _count(counter, "gain", g.n_t)
    return 1.0 - g.n0 * w2.diag


def soft_output(s_hat, mu, c: Constellation) -> DetectionResult:
    """Shared LLR stage: normalize, compute SINRs and max-log LLRs.

    Raises
    ------
    GainOutOfRangeError
        If any gain lies outside ``[0, 1]`` before clamping.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(~np.isfinite(mu)) or np.any(mu < 0.0) or np.any(mu > 1.0):
        raise GainOutOfRangeError(f"gain approximation out of range: {mu}")
    mu = np.clip(mu, GAIN_EPS, 1.0 - GAIN_EPS)
    rho = mu / (1.0 - mu)
    s_hat = np.asarray(s_hat)
    shape = (-1,) + (1,) * (s_hat.ndim - 1)
    z = s_hat / mu.reshape(shape)
    metrics = bit_metrics(z, c) * rho.reshape(shape + (1,))
    if s_hat.ndim == 1:
        llrs = metrics.reshape(-1)
    else:
        llrs = np.moveaxis(metrics, 0, -2).reshape(s_hat.shape[1], -1)
    return DetectionResult(s_hat, z, mu, rho, llrs)


def gs_detect(
    g: GramSystem,
    k: int,
    c: Constellation,
    init: str = "nse2",
    counter: MultCounter | None = None,
) -> DetectionResult:
    """Gauss-Seidel detector with a selectable starting point."""
    if k < 0:
        raise ValueError(f"iteration count must be >= 0, got {k}")
    w2 = nse2_inverse(g, counter if init == "nse2" else None)
    s = initial_solution(g, init, w2, counter)
    for _ in range(k):
        s = gs_iterate(g, s, counter)
    return soft_output(s, _gains_from_w2(g, w2, counter), c)


def igs_detect(
    g: GramSystem, k: int, c: Constellation, counter: MultCounter | None = None
) -> DetectionResult:
    """Improved Gauss-Seidel detector: Neumann start, `k` sweeps, approximate gains."""
    return gs_detect(g, k, c, "nse2", counter)


def nse_detect(
    g: GramSystem, k_terms: int, c: Constellation, counter: MultCounter | None = None
) -> DetectionResult:
    """Neumann-series detector ``sum_{k<K} (I - D^-1 W)^k D^-1 y_mf``.

    The first two terms are evaluated through :func:`nse2_inverse`, so
    ``k_terms=2`` reproduces the Gauss-Seidel Neumann start exactly.
    """
    if k_terms < 1:
        raise ValueError(f"k_terms must be >= 1, got {k_terms}")
    w2 = nse2_inverse(g, counter)
    shape = (-1,) + (1,) * (g.y_mf.ndim - 1)
    d_inv = w2.d_inv.reshape(shape)
    term = d_inv * g.y_mf
    if k_terms == 1:
        s = term
    else:
        s = initial_solution(g, "nse2", w2, counter)
        e = g.split.off_diagonal
        # (I - D^-1 W) = -D^-1 E
        term = -d_inv * (e @ term)
        for _ in range(2, k_terms):
            term = -d_inv * (e @ term)
            _count(counter, "nse", g.n_t**2)
            s = s + term
    return soft_output(s, _gains_from_w2(g, w2, counter), c)


def exact_mmse_detect(g: GramSystem, c: Constellation) -> DetectionResult:
    """Linear MMSE detection with exact inverse via Cholesky.

    Gains are the diagonal of ``U = I - N0 W^-1``.
    """
    chol = cholesky_factor(g.split)
    s_hat = cholesky_solve(chol, g.y_mf)
    # diag(W^-1) = squared column norms of C^-1
    c_inv = solve_lower(chol, np.eye(g.n_t, dtype=complex))
    w_inv_diag = np.sum(np.abs(c_inv) ** 2, axis=0)
    mu = 1.0 - g.n0 * w_inv_diag
    return soft_output(s_hat, mu, c)
