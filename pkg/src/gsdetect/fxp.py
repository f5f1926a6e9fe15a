"""Bit-accurate fixed-point model of the IGS detector datapath.

Values are carried as float64 numbers that always lie on the grid of their
format (``k * 2**-frac_bits``). Every register boundary rounds to the nearest
grid point (ties to even) and saturates; with at most 32-bit words all
products and sums are exact in double precision, so the model reproduces an
integer datapath bit for bit. Complex values are quantized per real and
imaginary part.

Word lengths follow the reference FPGA design; binary points were chosen
from the dynamic range of each signal (see :func:`default_formats`).
Processing is done in a *hardware domain* where the Gram matrix is scaled by
``n_t / n_r`` so its entries cluster around ``0`` and ``n_t``; the detector
output is invariant to that scaling.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .detect import GramSystem, DetectionResult, GAIN_EPS
from .modem import Constellation, bit_metrics
from .numerics import HermitianSplit

__all__ = [
    "FxpFormat",
    "SaturationStats",
    "CompressedEntry",
    "FxpConfig",
    "ReciprocalLut",
    "default_formats",
    "format_table",
    "quantize",
    "to_int",
    "compress_gram",
    "decompress_gram",
    "scale_gs_inputs",
    "fixed_gs_sweeps",
    "fixed_igs_detect",
]


@dataclass(frozen=True)
class FxpFormat:
    """Two's-complement (or unsigned) fixed-point word."""

    total_bits: int
    frac_bits: int
    signed: bool = True

    def __post_init__(self):
        if not 0 < self.frac_bits < self.total_bits <= 32:
            raise ValueError(
                f"need 0 < frac_bits < total_bits <= 32, got {self.total_bits}/{self.frac_bits}"
            )

    @property
    def step(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def max_int(self) -> int:
        return (1 << (self.total_bits - 1)) - 1 if self.signed else (1 << self.total_bits) - 1

    @property
    def min_int(self) -> int:
        return -(1 << (self.total_bits - 1)) if self.signed else 0

    @property
    def max_value(self) -> float:
        return self.max_int * self.step

    @property
    def min_value(self) -> float:
        return self.min_int * self.step


class SaturationStats:
    """Counts quantized samples and saturation events per signal name."""

    def __init__(self):
        self.samples = {}
        self.saturated = {}

    def record(self, name, n_samples, n_saturated):
        self.samples[name] = self.samples.get(name, 0) + int(n_samples)
        self.saturated[name] = self.saturated.get(name, 0) + int(n_saturated)

    @property
    def total_saturated(self) -> int:
        return sum(self.saturated.values())

    def rate(self, name) -> float:
        n = self.samples.get(name, 0)
        return self.saturated.get(name, 0) / n if n else 0.0

    def __repr__(self):
        return f"SaturationStats(saturated={self.saturated})"


def _quantize_real(x, fmt, stats, name):
    scaled = np.rint(np.asarray(x, dtype=float) * 2.0**fmt.frac_bits)
    clipped = np.clip(scaled, fmt.min_int, fmt.max_int)
    if stats is not None:
        stats.record(name, scaled.size, np.count_nonzero(clipped != scaled))
    return clipped * fmt.step


def quantize(x, fmt: FxpFormat, stats: SaturationStats | None = None, name: str = "value"):
    """Round to the nearest grid point of `fmt` (ties to even) and saturate.

    Complex input is quantized per component. Saturation is silent but
    counted in `stats` under `name`.
    """
    if np.iscomplexobj(x):
        x = np.asarray(x)
        return _quantize_real(x.real, fmt, stats, name) + 1j * _quantize_real(
            x.imag, fmt, stats, name
        )
    out = _quantize_real(x, fmt, stats, name)
    return out if np.ndim(out) else float(out)


def to_int(x, fmt: FxpFormat):
    """Integer code of grid value(s) `x`."""
    return np.rint(np.asarray(x, dtype=float) * 2.0**fmt.frac_bits).astype(np.int64)


@dataclass(frozen=True)
class CompressedEntry:
    """Offset flag plus short payload; represents ``payload + flag * n_t``.

    Fields may be scalars or arrays of matching shape.
    """

    offset_flag: np.ndarray
    payload: np.ndarray


def compress_gram(
    x,
    n_t: int,
    fmt: FxpFormat | None = None,
    payload_fmt: FxpFormat | None = None,
    stats: SaturationStats | None = None,
) -> CompressedEntry:
    """Offset-flag compression of (real) Gram entries.

    The entry is first quantized to `fmt`. Entries above ``n_t / 2`` set the
    flag and store ``x - n_t``; all others store ``x``. The payload is
    requantized to `payload_fmt`, which shares the binary point of `fmt`;
    payload overflow saturates and is counted as ``"payload"`` in `stats`.
    """
    if n_t < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    if fmt is None or payload_fmt is None:
        defaults = default_formats(n_t=n_t)
        fmt = fmt or defaults.gram
        payload_fmt = payload_fmt or defaults.gram_payload
    if payload_fmt.frac_bits != fmt.frac_bits:
        raise ValueError("payload and full-width formats must share the binary point")
    q = quantize(x, fmt)
    flag = np.asarray(q > n_t / 2.0)
    payload = quantize(np.where(flag, q - n_t, q), payload_fmt, stats, "payload")
    if np.ndim(payload) == 0:
        return CompressedEntry(int(flag), float(payload))
    return CompressedEntry(flag.astype(np.int8), payload)


def decompress_gram(e: CompressedEntry, n_t: int):
    """Restore ``payload + flag * n_t``."""
    out = np.asarray(e.payload) + np.asarray(e.offset_flag) * float(n_t)
    return out if np.ndim(out) else float(out)


def _compress_roundtrip(x, n_t, cfg, stats):
    """Compress then decompress real and imaginary parts of Gram entries."""
    parts = []
    for comp in (np.real(x), np.imag(x)):
        e = compress_gram(comp, n_t, cfg.gram, cfg.gram_payload, stats)
        parts.append(np.asarray(decompress_gram(e, n_t), dtype=float))
    return parts[0] + 1j * parts[1]


class ReciprocalLut:
    """Reciprocal by table look-up after power-of-two normalization.

    The input is written as ``m * 2**e`` with ``m`` in ``[1, 2)``; the top
    ``address_bits`` fraction bits of ``m`` address a table holding ``1 / m``
    at the bin centre, quantized to `out_fmt`.
    """

    def __init__(self, address_bits: int = 10, out_fmt: FxpFormat | None = None):
        self.address_bits = address_bits
        self.out_fmt = out_fmt or FxpFormat(15, 14, signed=False)
        n = 1 << address_bits
        centres = 1.0 + (np.arange(n) + 0.5) / n
        self.table = quantize(1.0 / centres, self.out_fmt)

    def __len__(self):
        return self.table.size

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ZeroDivisionError("reciprocal unit needs positive input")
        m, e = np.frexp(x)  # x = m * 2**e, m in [0.5, 1)
        m, e = 2.0 * m, e - 1
        idx = np.minimum(((m - 1.0) * len(self)).astype(np.int64), len(self) - 1)
        return np.ldexp(self.table[idx], -e)


@dataclass(frozen=True)
class FxpConfig:
    """Word-length table of the fixed-point datapath.

    Total widths: inputs ``h``, ``y``, ``n0`` 15 bit; MAC registers 22 bit;
    Gram output 15 bit compressed to 9 bit; matched filter 15 bit; SINR unit
    15 bit in, 12 bit out; LLR unit 12 bit in, 10 bit out; reciprocal tables
    with 1024 entries of 15 bit.
    """

    h: FxpFormat
    y: FxpFormat
    n0: FxpFormat
    mac: FxpFormat
    gram: FxpFormat
    gram_payload: FxpFormat
    mf: FxpFormat
    nse2: FxpFormat
    solution: FxpFormat
    gs: FxpFormat
    gs_recip: FxpFormat
    scu_in: FxpFormat
    rho: FxpFormat
    lcu_in: FxpFormat
    llr: FxpFormat
    lut_address_bits: int = 10
    lut_out: FxpFormat = field(default_factory=lambda: FxpFormat(15, 14, signed=False))
    scale_gs: bool = True

    def with_scaling(self, enabled: bool) -> "FxpConfig":
        return replace(self, scale_gs=enabled)


def _int_bits(magnitude):
    """Integer bits (excluding sign) needed to hold values up to `magnitude`."""
    return max(0, math.ceil(math.log2(magnitude)))


def default_formats(n_r: int = 128, n_t: int = 8) -> FxpConfig:
    """Word-length table with binary points derived from signal ranges.

    Ranges in the hardware domain (Gram matrix scaled by ``n_t / n_r``):
    diagonal entries near ``n_t``, off-diagonal entries near zero,
    matched-filter output up to about ``1.5 n_t``, symbol estimates within
    ``+-4``. The compressed payload must cover ``+-n_t / 2``.
    """
    payload_int = _int_bits(n_t / 2.0) + 1
    gram_frac = 9 - 1 - payload_int
    mf_int = _int_bits(2.0 * n_t)
    return FxpConfig(
        h=FxpFormat(15, 11),  # |Re h| < 8
        y=FxpFormat(15, 14 - _int_bits(2.0 * math.sqrt(n_t) * 3)),
        n0=FxpFormat(15, 14 - _int_bits(max(n_t, 1) * 1.0) - 1),
        mac=FxpFormat(22, 21 - _int_bits(4.0 * n_r)),
        gram=FxpFormat(15, gram_frac),
        gram_payload=FxpFormat(9, gram_frac),
        mf=FxpFormat(15, 14 - mf_int),
        nse2=FxpFormat(15, 14),
        solution=FxpFormat(15, 12),
        gs=FxpFormat(15, 12),
        gs_recip=FxpFormat(15, 12),
        scu_in=FxpFormat(15, 14),
        rho=FxpFormat(12, 11),
        lcu_in=FxpFormat(12, 9),
        llr=FxpFormat(10, 6),
    )


def format_table(cfg: FxpConfig | None = None) -> list:
    """``(signal, total_bits, frac_bits, signed)`` rows of a configuration."""
    cfg = cfg or default_formats()
    rows = []
    for name, value in vars(cfg).items():
        if isinstance(value, FxpFormat):
            rows.append((name, value.total_bits, value.frac_bits, value.signed))
    return rows


def scale_gs_inputs(g: GramSystem, factor: float | None = None) -> GramSystem:
    """Scale the Gauss-Seidel operands down by `factor` (default ``n_r``).

    Dividing ``y_mf`` and ``W`` by the same factor leaves every sweep result
    unchanged and shrinks the dynamic range of the unit. For a power-of-two
    factor the scaling is an exact exponent shift; other factors fall back
    to a multiplication with a warning.
    """
    factor = float(g.n_r if factor is None else factor)
    mant, exp = np.frexp(factor)
    if mant == 0.5:
        shift = exp - 1

        def scale(v):
            return np.ldexp(np.real(v), -shift) + 1j * np.ldexp(np.imag(v), -shift)

        d = np.ldexp(g.d, -shift)
    else:
        warnings.warn(f"scale factor {factor} is not a power of two; using a multiplier")

        def scale(v):
            return v / factor

        d = g.d / factor
    split = HermitianSplit(d, scale(g.split.lower))
    return GramSystem(split, scale(g.y_mf), g.n0 / factor, g.n_r)


def _mac(products, cfg, stats, name, axis=0):
    """Accumulate rounded products in a saturating MAC register."""
    if np.shape(products)[axis] == 0:
        return np.zeros(np.delete(np.shape(products), axis), dtype=complex)
    terms = quantize(products, cfg.mac)
    acc = np.cumsum(terms, axis=axis)
    if stats is not None:
        over = (np.abs(acc.real) > cfg.mac.max_value) | (np.abs(acc.imag) > cfg.mac.max_value)
        stats.record(name + "_mac", acc.size, np.count_nonzero(over))
    total = np.take(acc, -1, axis=axis)
    return quantize(total, cfg.mac)


def fixed_gs_sweeps(
    w_lower,
    d,
    y,
    s0,
    k: int,
    cfg: FxpConfig,
    recip: ReciprocalLut,
    stats: SaturationStats | None = None,
):
    """`k` Gauss-Seidel sweeps on grid-valued operands in the ``gs`` format.

    Each sweep computes ``b = y - L^H s`` with MAC accumulation, then a
    forward substitution using table reciprocals of the diagonal.
    """
    fmt = cfg.gs
    r = quantize(recip(d), cfg.gs_recip)
    upper = np.conj(w_lower).T
    s = quantize(s0, fmt, stats, "gs_state")
    n = d.size
    for _ in range(k):
        prod = upper[:, :, None] * s[None, :, :]
        b = quantize(y - _mac(np.moveaxis(prod, 1, 0), cfg, stats, "gs_b"), fmt, stats, "gs_b")
        new = np.zeros_like(s)
        for i in range(n):
            acc = b[i] - _mac(w_lower[i, :i, None] * new[:i], cfg, stats, "gs_fs")
            new[i] = quantize(acc * r[i], fmt, stats, "gs_state")
        s = new
    return s


def fixed_igs_detect(
    h,
    y,
    n0: float,
    k: int,
    c: Constellation,
    cfg: FxpConfig | None = None,
    stats: SaturationStats | None = None,
) -> DetectionResult:
    """Fixed-point IGS detection from raw channel, receive vectors and noise variance.

    Parameters
    ----------
    h : array_like, shape (n_r, n_t)
    y : array_like, shape (n_r,) or (n_r, T)
    n0 : float
    k : int
        Gauss-Seidel sweeps.
    c : Constellation
    cfg : FxpConfig, optional
        Defaults to :func:`default_formats` for the system size.
    stats : SaturationStats, optional
        Receives saturation counts per signal.

    Returns
    -------
    DetectionResult
        LLRs are 10-bit grid values up to a common power-of-two factor per
        channel realization (the Viterbi metric is invariant to it).
    """
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    single = y.ndim == 1
    y2 = y[:, None] if single else y
    n_r, n_t = h.shape
    cfg = cfg or default_formats(n_r, n_t)
    recip = ReciprocalLut(cfg.lut_address_bits, cfg.lut_out)

    hq = quantize(h, cfg.h, stats, "h")
    yq = quantize(y2, cfg.y, stats, "y")
    n0q = quantize(n0, cfg.n0, stats, "n0")

    # preprocessing in raw units, then shift into the hardware domain
    to_hw = n_t / n_r
    y_mf = _mac(np.conj(hq)[:, :, None] * yq[:, None, :], cfg, stats, "mf")
    y_hw = quantize(y_mf * to_hw, cfg.mf, stats, "mf")
    rows, cols = np.tril_indices(n_t)
    gram = _mac(np.conj(hq[:, rows]) * hq[:, cols], cfg, stats, "rgm")
    gram = gram + np.where(rows == cols, n0q, 0.0)
    w_lower_tri = np.zeros((n_t, n_t), dtype=complex)
    w_lower_tri[rows, cols] = quantize(gram * to_hw, cfg.gram, stats, "rgm")
    w_lower_tri = _compress_roundtrip(w_lower_tri, n_t, cfg, stats)
    d = np.real(np.diag(w_lower_tri)).copy()
    w_lower = np.tril(w_lower_tri, -1)
    n0_hw = quantize(n0q * to_hw, cfg.scu_in, stats, "n0_hw")

    # two-term Neumann inverse and initial solution
    d_inv = quantize(recip(d), cfg.nse2, stats, "nse2")
    w2 = np.diag(d_inv).astype(complex)
    lo, hi = np.tril_indices(n_t, -1)
    w2[lo, hi] = quantize(-(d_inv[lo] * w_lower[lo, hi]) * d_inv[hi], cfg.nse2, stats, "nse2")
    w2[hi, lo] = np.conj(w2[lo, hi])
    s0 = quantize(
        _mac(np.moveaxis(w2[:, :, None] * y_hw[None, :, :], 1, 0), cfg, stats, "init"),
        cfg.solution,
        stats,
        "init",
    )

    # Gauss-Seidel unit, optionally on operands shifted down by n_t
    if cfg.scale_gs:
        g_hw = GramSystem(HermitianSplit(d, w_lower), y_hw, 0.0, n_t)
        g_gs = scale_gs_inputs(g_hw, n_t)
        gs_d = quantize(g_gs.d, cfg.gs, stats, "gs_in")
        gs_l = quantize(g_gs.split.lower, cfg.gs, stats, "gs_in")
        gs_y = quantize(g_gs.y_mf, cfg.gs, stats, "gs_in")
    else:
        gs_d = quantize(d, cfg.gs, stats, "gs_in")
        gs_l = quantize(w_lower, cfg.gs, stats, "gs_in")
        gs_y = quantize(y_hw, cfg.gs, stats, "gs_in")
    s_hat = fixed_gs_sweeps(gs_l, gs_d, gs_y, s0, k, cfg, recip, stats)

    # SINR unit: mu = 1 - N0 [W_2^-1]_ii, rho = mu / (1 - mu)
    one_minus_mu = quantize(n0_hw * d_inv, cfg.scu_in, stats, "scu")
    one_minus_mu = np.maximum(one_minus_mu, cfg.scu_in.step)
    mu = quantize(1.0 - one_minus_mu, cfg.scu_in, stats, "scu")
    mu = np.clip(mu, GAIN_EPS, 1.0 - GAIN_EPS)
    rho = mu * recip(one_minus_mu)
    # block-floating SINR: common power-of-two exponent, 12-bit mantissas
    _, e = np.frexp(np.max(rho))
    rho_q = quantize(np.ldexp(rho, -int(e)), cfg.rho, stats, "rho")

    z = quantize(s_hat * recip(mu)[:, None], cfg.lcu_in, stats, "lcu_in")
    metrics = bit_metrics(z, c)
    llr = quantize(metrics * rho_q[:, None, None], cfg.llr, stats, "llr")
    llrs = np.moveaxis(llr, 0, -2).reshape(llr.shape[1], -1)
    if single:
        return DetectionResult(s_hat[:, 0], z[:, 0], mu, rho, llrs[0])
    return DetectionResult(s_hat, z, mu, rho, llrs)
