"""Uplink channel: Rayleigh realizations, Kronecker correlation and AWGN.

All generators take either an integer seed (or seed sequence) or an existing
``numpy.random.Generator``. Integer seeds go through ``PCG64`` so that results
are reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import NotPositiveDefiniteError, cholesky_factor

__all__ = [
    "ChannelRealization",
    "KroneckerSpec",
    "as_generator",
    "complex_normal",
    "snr_to_n0",
    "gen_iid",
    "exponential_correlation",
    "apply_kronecker",
    "transmit",
]


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class KroneckerSpec:
    """Correlation factors at the base station (`zeta_r`) and user side (`zeta_t`)."""

    zeta_r: float = 0.0
    zeta_t: float = 0.0

    def __post_init__(self):
        for name in ("zeta_r", "zeta_t"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ChannelRealization:
    """Channel matrix `h` (``n_r x n_t``) and noise variance `n0` per entry."""

    h: np.ndarray
    n0: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.ndim != 2:
            raise ValueError(f"channel matrix must be 2-D, got shape {h.shape}")
        if not self.n0 >= 0:
            raise ValueError(f"noise variance must be non-negative, got {self.n0}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "n0", float(self.n0))

    @property
    def n_r(self) -> int:
        return self.h.shape[0]

    @property
    def n_t(self) -> int:
        return self.h.shape[1]


def snr_to_n0(n_t: int, snr_db: float) -> float:
    """Noise variance for an average SNR per receive antenna of ``n_t * Es / N0``.

    Symbols have unit energy, so ``N0 = n_t / 10**(snr_db / 10)``.
    """
    if n_t < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    return n_t / 10.0 ** (snr_db / 10.0)


def gen_iid(n_r: int, n_t: int, seed) -> np.ndarray:
    """I.i.d. Rayleigh channel with unit-variance complex Gaussian entries."""
    if not n_r >= n_t >= 1:
        raise ValueError(f"need n_r >= n_t >= 1, got n_r={n_r}, n_t={n_t}")
    return complex_normal(as_generator(seed), (n_r, n_t))


def exponential_correlation(n: int, zeta: float) -> np.ndarray:
    """Correlation matrix with entries ``zeta**|i - j|``."""
    idx = np.arange(n)
    return float(zeta) ** np.abs(idx[:, None] - idx[None, :])


def _correlation_root(n: int, zeta: float) -> np.ndarray:
    if zeta == 0.0 or n == 1:
        return np.eye(n, dtype=complex)
    try:
        return cholesky_factor(exponential_correlation(n, zeta))
    except NotPositiveDefiniteError as err:
        raise NotPositiveDefiniteError(
            f"correlation matrix with zeta={zeta} is not positive definite"
        ) from err


def apply_kronecker(h_w, spec: KroneckerSpec) -> np.ndarray:
    """Correlate an i.i.d. channel as ``C_r H_w C_t^H``.

    ``C_r`` and ``C_t`` are Cholesky factors of the exponential correlation
    matrices at receiver and transmitter, so the output has receive
    correlation ``R_r`` and transmit correlation ``R_t``.
    """
    h_w = np.asarray(h_w, dtype=complex)
    n_r, n_t = h_w.shape
    c_r = _correlation_root(n_r, spec.zeta_r)
    c_t = _correlation_root(n_t, spec.zeta_t)
    return c_r @ h_w @ c_t.conj().T


def transmit(ch: ChannelRealization, s, seed) -> np.ndarray:
    """Receive vector ``y = H s + n``.

    `s` has shape ``(n_t,)`` or ``(n_t, T)`` for ``T`` channel uses sharing
    the realization.
    """
    s = np.asarray(s)
    if s.shape[0] != ch.n_t:
        raise ValueError(f"symbol vector has {s.shape[0]} rows, expected n_t={ch.n_t}")
    y = ch.h @ s
    if ch.n0 > 0:
        y = y + complex_normal(as_generator(seed), y.shape, ch.n0)
    return y
