"""Gray-labelled square QAM and the max-log bit metric.

Bit ``b`` of a symbol label is counted from the most significant bit. The
first half of the bits selects the real (in-phase) level, the second half
the imaginary level, each with a binary-reflected Gray code.

The bit metric follows the log-ratio orientation ``ln(P[x=1] / P[x=0])``::

    lambda_b(z) = min_{a in Omega_b^0} |z - a|^2 - min_{a in Omega_b^1} |z - a|^2

so a positive value favours bit 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "Constellation",
    "qam",
    "get_constellation",
    "map_bits",
    "demap_hard",
    "lambda_b",
    "lambda_brute",
    "bit_metrics",
]

_NAMES = {"qpsk": 2, "4qam": 2, "16qam": 4, "64qam": 6}


def _gray(i):
    return i ^ (i >> 1)


@dataclass(frozen=True)
class _AxisTable:
    """Piecewise-linear metric of one axis bit: ``slope * x + intercept``."""

    breaks: np.ndarray
    slope: np.ndarray
    intercept: np.ndarray

    def __call__(self, x):
        seg = np.searchsorted(self.breaks, x)
        return self.slope[seg] * x + self.intercept[seg]


def _nearest(levels, x):
    return levels[np.argmin(np.abs(x - levels))]


def _axis_table(levels, labels, bit, m) -> _AxisTable:
    mask = ((labels >> (m - 1 - bit)) & 1).astype(bool)
    zero, one = np.sort(levels[~mask]), np.sort(levels[mask])
    # nearest-point boundaries of either subset are the only kinks
    breaks = np.union1d((zero[1:] + zero[:-1]) / 2, (one[1:] + one[:-1]) / 2)
    if breaks.size:
        probes = np.concatenate(
            ([breaks[0] - 1.0], (breaks[1:] + breaks[:-1]) / 2, [breaks[-1] + 1.0])
        )
    else:
        probes = np.array([0.0])
    a0 = np.array([_nearest(zero, p) for p in probes])
    a1 = np.array([_nearest(one, p) for p in probes])
    return _AxisTable(breaks, 2.0 * (a1 - a0), a0**2 - a1**2)


@dataclass(frozen=True)
class Constellation:
    """Unit-energy square QAM with Gray labelling.

    Attributes
    ----------
    bits_per_symbol : int
        ``B``; the constellation has ``2**B`` points.
    points : ndarray
        Constellation points indexed by their integer label.
    labels : ndarray
        ``labels[k]`` is the integer label of ``points[k]`` (identity order).
    """

    bits_per_symbol: int
    points: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    levels: np.ndarray = field(repr=False)
    level_labels: np.ndarray = field(repr=False)
    tables: tuple = field(repr=False)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_axis(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def label_bits(self) -> np.ndarray:
        """``(2**B, B)`` array of label bits, most significant first."""
        B = self.bits_per_symbol
        return (self.labels[:, None] >> np.arange(B - 1, -1, -1)) & 1


@lru_cache(maxsize=None)
def qam(bits_per_symbol: int) -> Constellation:
    """Square Gray QAM with ``2**bits_per_symbol`` points and ``Es = 1``."""
    B = int(bits_per_symbol)
    if B < 2 or B % 2:
        raise ValueError(f"square QAM needs an even number of bits >= 2, got {B}")
    m = B // 2
    M = 1 << m
    idx = np.arange(M)
    levels = (2.0 * idx - (M - 1)) / np.sqrt(2.0 * (M * M - 1) / 3.0)
    level_labels = _gray(idx)
    # label -> level index along one axis
    pos = np.empty(M, dtype=int)
    pos[level_labels] = idx
    labels = np.arange(1 << B)
    re = levels[pos[labels >> m]]
    im = levels[pos[labels & (M - 1)]]
    points = re + 1j * im
    tables = tuple(_axis_table(levels, level_labels, b, m) for b in range(m))
    for arr in (points, labels, levels, level_labels):
        arr.setflags(write=False)
    return Constellation(B, points, labels, levels, level_labels, tables)


def get_constellation(name) -> Constellation:
    """Look up ``"qpsk"``, ``"16qam"`` or ``"64qam"`` (or pass a bit count)."""
    if isinstance(name, Constellation):
        return name
    if isinstance(name, (int, np.integer)):
        return qam(int(name))
    key = str(name).lower().replace("-", "")
    if key not in _NAMES:
        raise ValueError(f"unknown modulation {name!r}; choose from {sorted(_NAMES)}")
    return qam(_NAMES[key])


def map_bits(bits, c: Constellation) -> np.ndarray:
    """Map consecutive groups of ``B`` bits to constellation points."""
    bits = np.asarray(bits).astype(np.int64).ravel()
    B = c.bits_per_symbol
    if bits.size % B:
        raise ValueError(f"bit count {bits.size} is not a multiple of {B}")
    weights = 1 << np.arange(B - 1, -1, -1)
    return c.points[bits.reshape(-1, B) @ weights]


def demap_hard(symbols, c: Constellation) -> np.ndarray:
    """Bits of the nearest constellation point for each symbol."""
    z = np.asarray(symbols).ravel()
    nearest = np.argmin(np.abs(z[:, None] - c.points[None, :]), axis=1)
    return c.label_bits[nearest].ravel()


def lambda_brute(z, b: int, c: Constellation) -> np.ndarray:
    """Bit metric by exhaustive minimum over both labelled subsets."""
    if not 0 <= b < c.bits_per_symbol:
        raise IndexError(f"bit index {b} out of range for B={c.bits_per_symbol}")
    z = np.asarray(z, dtype=complex)
    mask = c.label_bits[:, b].astype(bool)
    d2 = np.abs(z[..., None] - c.points) ** 2
    return d2[..., ~mask].min(axis=-1) - d2[..., mask].min(axis=-1)


def lambda_b(z, b: int, c: Constellation, method: str = "fast") -> np.ndarray:
    """Max-log bit metric of bit `b` for equalized symbol(s) `z`.

    ``method="fast"`` evaluates the per-axis piecewise-linear form that the
    Gray labelling allows; ``method="brute"`` searches all points.
    """
    if method == "brute":
        return lambda_brute(z, b, c)
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")
    if not 0 <= b < c.bits_per_symbol:
        raise IndexError(f"bit index {b} out of range for B={c.bits_per_symbol}")
    z = np.asarray(z, dtype=complex)
    m = c.bits_per_axis
    if b < m:
        return c.tables[b](z.real)
    return c.tables[b - m](z.imag)


def bit_metrics(z, c: Constellation) -> np.ndarray:
    """All ``B`` bit metrics of `z`, stacked on a new last axis."""
    z = np.asarray(z, dtype=complex)
    m = c.bits_per_axis
    out = np.empty(z.shape + (c.bits_per_symbol,))
    for b, table in enumerate(c.tables):
        out[..., b] = table(z.real)
        out[..., b + m] = table(z.imag)
    return out
