"""Rate-1/2 convolutional code with zero-tail termination and soft Viterbi decoding.

LLRs use the ``ln(P[x=1] / P[x=0])`` orientation: a positive value favours a
coded one. The decoder maximises ``sum(c_j * llr_j)`` over codewords, which
is the maximum-likelihood criterion for independent bit LLRs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ConvCode",
    "STANDARD_CODE",
    "encode",
    "viterbi_decode_soft",
    "make_interleaver",
    "interleave",
    "deinterleave",
]


def _parity(x):
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out ^= x & 1
        x = x >> 1
    return out


@dataclass(frozen=True)
class ConvCode:
    """Feed-forward rate-1/2 convolutional code.

    Parameters
    ----------
    constraint_length : int
        Number of taps ``K`` (memory ``K - 1``).
    generators : tuple of int
        Two generator polynomials, conventionally written in octal. The most
        significant of the ``K`` bits multiplies the current input bit.
    """

    constraint_length: int = 7
    generators: tuple = (0o133, 0o171)

    def __post_init__(self):
        K = self.constraint_length
        if K < 2:
            raise ValueError(f"constraint length must be >= 2, got {K}")
        if len(self.generators) != 2:
            raise ValueError("a rate-1/2 code needs exactly two generators")
        for g in self.generators:
            if g >= 1 << K or not g >> (K - 1) & 1:
                raise ValueError(f"generator {g:o} (octal) is not delay-free for K={K}")

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def coded_length(self, n_info: int) -> int:
        return 2 * (n_info + self.memory)

    @cached_property
    def _trellis(self):
        # predecessor p of next state ns: input bit u = ns >> (m - 1)
        m = self.memory
        ns = np.arange(self.n_states)
        u = ns >> (m - 1)
        prev = ((ns & ((1 << (m - 1)) - 1)) << 1)[:, None] | np.arange(2)[None, :]
        reg = (u[:, None] << m) | prev
        out = np.stack([_parity(reg & g) for g in self.generators], axis=-1)
        return prev, out, u


STANDARD_CODE = ConvCode()


def encode(code: ConvCode, info_bits) -> np.ndarray:
    """Encode with ``K - 1`` zero tail bits; output interleaves the two streams."""
    bits = np.asarray(info_bits, dtype=np.int64).ravel()
    if bits.size == 0:
        raise ValueError("cannot encode an empty message")
    m = code.memory
    padded = np.concatenate([bits, np.zeros(m, dtype=np.int64)])
    # reg[t] holds u[t] at the top bit and u[t-1..t-m] below it
    reg = np.zeros(padded.size, dtype=np.int64)
    for d in range(m + 1):
        shifted = np.concatenate([np.zeros(d, dtype=np.int64), padded[: padded.size - d]])
        reg |= shifted << (m - d)
    out = np.stack([_parity(reg & g) for g in code.generators], axis=-1)
    return out.ravel().astype(np.int8)


def viterbi_decode_soft(code: ConvCode, llrs) -> np.ndarray:
    """Maximum-metric zero-tail path through the trellis.

    Parameters
    ----------
    llrs : array_like, shape (2 * (k + K - 1),) or (batch, 2 * (k + K - 1))
        Coded-bit LLRs in transmission order. Infinite values are allowed.

    Returns
    -------
    ndarray of int8, shape (k,) or (batch, k)
    """
    llrs = np.asarray(llrs, dtype=float)
    single = llrs.ndim == 1
    llrs = np.atleast_2d(llrs)
    n = llrs.shape[1]
    m = code.memory
    if n % 2 or n // 2 <= m:
        raise ValueError(f"LLR length {n} is not 2 * (k + {m}) for any k >= 1")
    # saturate so that +inf and -inf metrics never meet as inf - inf
    llrs = np.clip(llrs, -1e100, 1e100)
    steps = n // 2
    batch = llrs.shape[0]
    prev, out, u = code._trellis
    S = code.n_states
    pairs = llrs.reshape(batch, steps, 2)
    # branch metric for every (next state, predecessor slot)
    sel = out.astype(float)
    metric = np.full((batch, S), -np.inf)
    metric[:, 0] = 0.0
    decisions = np.empty((steps, batch, S), dtype=np.int8)
    for t in range(steps):
        bm = pairs[:, t, None, None, :] * sel[None, :, :, :]
        cand = metric[:, prev] + bm.sum(axis=-1)
        choice = np.argmax(cand, axis=-1)
        decisions[t] = choice
        metric = np.take_along_axis(cand, choice[..., None], axis=-1)[..., 0]
    state = np.zeros(batch, dtype=np.int64)
    bits = np.empty((batch, steps), dtype=np.int8)
    rows = np.arange(batch)
    for t in range(steps - 1, -1, -1):
        bits[:, t] = u[state]
        state = prev[state, decisions[t, rows, state]]
    bits = bits[:, : steps - m]
    return bits[0] if single else bits


def make_interleaver(n: int, seed=0x1F2E) -> np.ndarray:
    """Fixed pseudo-random permutation of length `n`."""
    return np.random.Generator(np.random.PCG64(seed)).permutation(n)


def interleave(x, perm) -> np.ndarray:
    return np.asarray(x)[..., perm]


def deinterleave(x, perm) -> np.ndarray:
    x = np.asarray(x)
    out = np.empty_like(x)
    out[..., perm] = x
    return out
