import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsdetect.channel import ChannelRealization, gen_iid, snr_to_n0, transmit
from gsdetect.detect import GramSystem, gs_iterate, igs_detect, preprocess
from gsdetect.fxp import (
    CompressedEntry,
    FxpFormat,
    ReciprocalLut,
    SaturationStats,
    compress_gram,
    decompress_gram,
    default_formats,
    fixed_igs_detect,
    format_table,
    quantize,
    scale_gs_inputs,
    to_int,
)
from gsdetect.modem import map_bits, qam
from gsdetect.numerics import HermitianSplit

from oracles import round_half_even_grid

Q15_10 = FxpFormat(15, 10)
QAM64 = qam(6)


def test_format_validation():
    for total, frac in ((15, 0), (15, 15), (33, 10), (8, 9)):
        with pytest.raises(ValueError):
            FxpFormat(total, frac)
    fmt = FxpFormat(9, 5)
    assert fmt.max_value == 255 / 32
    assert fmt.min_value == -8.0
    assert FxpFormat(15, 14, signed=False).max_value == (2**15 - 1) / 2**14


def test_quantize_zero():
    for fmt in (Q15_10, FxpFormat(9, 5), FxpFormat(22, 12)):
        assert quantize(0.0, fmt) == 0.0


def test_quantize_saturates_and_counts():
    stats = SaturationStats()
    assert quantize(Q15_10.max_value + 0.01, Q15_10, stats, "x") == Q15_10.max_value
    assert quantize(-100.0, Q15_10, stats, "x") == Q15_10.min_value
    assert quantize(1.0, Q15_10, stats, "x") == 1.0
    assert stats.saturated["x"] == 2 and stats.samples["x"] == 3
    assert stats.rate("x") == pytest.approx(2 / 3)


def test_quantize_pi():
    # pi * 1024 = 3216.99... -> code 3217
    assert quantize(math.pi, Q15_10) == 3217 / 1024
    assert to_int(quantize(math.pi, Q15_10), Q15_10) == 3217


def test_quantize_ties_to_even():
    step = Q15_10.step
    assert quantize(2.5 * step, Q15_10) == 2 * step
    assert quantize(3.5 * step, Q15_10) == 4 * step
    assert quantize(-2.5 * step, Q15_10) == -2 * step


def test_quantize_complex_per_component():
    stats = SaturationStats()
    q = quantize(np.array([1.0004 - 40.0j]), Q15_10, stats, "c")
    assert q[0] == complex(1.0, Q15_10.min_value)
    assert stats.saturated["c"] == 1


@settings(max_examples=300, deadline=None)
@given(x=st.floats(-15.9, 15.9, allow_nan=False))
def test_quantize_matches_python_round(x):
    assert quantize(x, Q15_10) == round_half_even_grid(x, 10)


@pytest.mark.parametrize(
    "x, flag, payload",
    [(0.05, 0, 0.05), (7.9, 1, -0.1), (4.0, 0, 4.0)],
)
def test_compress_examples(x, flag, payload):
    fmt, pfmt = FxpFormat(15, 5), FxpFormat(9, 5)
    e = compress_gram(x, 8, fmt, pfmt)
    assert e.offset_flag == flag
    assert e.payload == pytest.approx(payload, abs=fmt.step / 2 + 1e-12)
    assert decompress_gram(e, 8) == quantize(x, fmt)


def test_decompress_examples():
    assert decompress_gram(CompressedEntry(0, 0.375), 8) == 0.375
    assert decompress_gram(CompressedEntry(1, -0.09375), 8) == 7.90625


def test_compress_roundtrip_uniform():
    x = np.random.default_rng(0).uniform(-1.0, 9.0, 10**6)
    cfg = default_formats(128, 8)
    stats = SaturationStats()
    e = compress_gram(x, 8, cfg.gram, cfg.gram_payload, stats)
    np.testing.assert_array_equal(decompress_gram(e, 8), quantize(x, cfg.gram))
    assert stats.saturated["payload"] == 0


def test_compress_requires_shared_binary_point():
    with pytest.raises(ValueError):
        compress_gram(1.0, 8, FxpFormat(15, 5), FxpFormat(9, 4))
    with pytest.raises(ValueError):
        compress_gram(1.0, 0)


def test_reciprocal_lut():
    lut = ReciprocalLut()
    assert len(lut) == 1024
    assert lut.table.max() <= lut.out_fmt.max_value
    x = np.random.default_rng(1).uniform(0.01, 300.0, 10_000)
    rel = np.abs(lut(x) * x - 1.0)
    # half a table bin plus output rounding
    assert rel.max() < 2.0**-10
    np.testing.assert_array_equal(lut(np.array([3.0, 6.0])) * np.array([1, 2]), lut(3.0) * np.ones(2))
    with pytest.raises(ZeroDivisionError):
        lut(0.0)


def test_default_formats_widths():
    rows = {name: (total, frac) for name, total, frac, _ in format_table()}
    assert rows["h"][0] == rows["y"][0] == rows["n0"][0] == 15
    assert rows["mac"][0] == 22
    assert rows["gram_payload"] == (9, rows["gram"][1])
    assert rows["rho"][0] == 12
    assert rows["llr"][0] == 10
    cfg = default_formats()
    assert cfg.lut_address_bits == 10 and cfg.lut_out.total_bits == 15
    # payload must hold +-n_t/2
    assert cfg.gram_payload.max_value >= 4.0


def _gram(seed, n_r=128, n_t=8):
    h = gen_iid(n_r, n_t, seed)
    y = transmit(ChannelRealization(h, 0.1), np.ones(n_t), seed)
    return preprocess(ChannelRealization(h, 0.1), y)


def test_scale_gs_is_exact_in_floating_point():
    g = _gram(1)
    scaled = scale_gs_inputs(g)
    s = np.zeros(8, dtype=complex)
    a, b = s, s
    for _ in range(3):
        a = gs_iterate(g, a)
        b = gs_iterate(scaled, b)
    assert np.max(np.abs(a - b)) < 1e-12


def test_scale_gs_power_of_two_shift():
    g = _gram(2)
    scaled = scale_gs_inputs(g)
    # n_r = 128: every operand is an exact 2**-7 multiple of the original
    np.testing.assert_array_equal(scaled.d, g.d * 2.0**-7)
    np.testing.assert_array_equal(scaled.y_mf, g.y_mf * 2.0**-7)
    np.testing.assert_array_equal(scaled.split.lower, g.split.lower * 2.0**-7)


def test_scale_gs_non_power_of_two_warns():
    g = GramSystem(HermitianSplit(np.array([3.0, 3.0]), np.zeros((2, 2))), np.ones(2), 0.1, 3)
    with pytest.warns(UserWarning, match="not a power of two"):
        scaled = scale_gs_inputs(g)
    np.testing.assert_allclose(scaled.d, [1.0, 1.0])


def _frame(seed, n_r=128, snr_db=0.0, vectors=1):
    h = gen_iid(n_r, 8, seed)
    n0 = snr_to_n0(8, snr_db)
    bits = np.random.default_rng(seed).integers(0, 2, 48 * vectors)
    s = map_bits(bits, QAM64).reshape(vectors, 8).T
    y = transmit(ChannelRealization(h, n0), s, seed + 7)
    return h, y, n0


def test_scaling_reduces_saturation():
    cfg = default_formats(128, 8)
    with_scaling, without = SaturationStats(), SaturationStats()
    for seed in range(1000):
        h, y, n0 = _frame(seed)
        fixed_igs_detect(h, y, n0, 1, QAM64, cfg, with_scaling)
        fixed_igs_detect(h, y, n0, 1, QAM64, cfg.with_scaling(False), without)
    assert with_scaling.total_saturated < without.total_saturated


def test_fixed_close_to_float():
    h, y, n0 = _frame(3, vectors=20)
    ch = ChannelRealization(h, n0)
    fl = igs_detect(preprocess(ch, y), 1, QAM64)
    fx = fixed_igs_detect(h, y, n0, 1, QAM64)
    assert np.max(np.abs(fx.s_hat - fl.s_hat)) < 0.05
    np.testing.assert_allclose(fx.mu, fl.mu, atol=2e-3)
    # LLRs agree up to the block-floating scale factor: compare signs
    strong = np.abs(fl.llrs) > 0.5 * np.max(np.abs(fl.llrs)) * 0.05
    assert np.mean(np.sign(fx.llrs[strong]) == np.sign(fl.llrs[strong])) > 0.99


def test_fixed_outputs_on_grid():
    h, y, n0 = _frame(4)
    y = y[:, 0]
    cfg = default_formats(128, 8)
    r = fixed_igs_detect(h, y, n0, 1, QAM64, cfg)
    assert r.llrs.shape == (48,)
    np.testing.assert_array_equal(quantize(r.llrs, cfg.llr), r.llrs)
    np.testing.assert_array_equal(quantize(r.s_hat, cfg.gs), r.s_hat)


def test_gram_payload_overflow_rate_iid():
    cfg = default_formats(128, 8)
    stats = SaturationStats()
    for seed in range(500):
        h = gen_iid(128, 8, seed)
        w = (h.conj().T @ h) * (8 / 128)
        vals = w[np.tril_indices(8)]
        for part in (vals.real, vals.imag):
            compress_gram(part, 8, cfg.gram, cfg.gram_payload, stats)
    assert stats.rate("payload") < 1e-3
