"""
The fixed-point datapath
========================

The detector hardware keeps every signal in a short two's-complement word.
This script prints the word-length table, shows how Gram entries compress
to 9 bits, and compares fixed- and floating-point detection on one frame.
"""

import numpy as np

from gsdetect.channel import ChannelRealization, gen_iid, snr_to_n0, transmit
from gsdetect.detect import igs_detect, preprocess
from gsdetect.fxp import (
    SaturationStats,
    compress_gram,
    decompress_gram,
    default_formats,
    fixed_igs_detect,
    format_table,
)
from gsdetect.modem import map_bits, qam

cfg = default_formats(128, 8)
print(f"{'signal':14s} bits frac")
for name, total, frac, signed in format_table(cfg):
    print(f"{name:14s} {total:4d} {frac:4d}{'' if signed else '  unsigned'}")

# In the hardware domain the Gram matrix is scaled by n_t / n_r, so the
# diagonal sits near n_t = 8 and everything else near 0. Entries above 4 are
# stored as (x - 8) with a flag bit.
h = gen_iid(128, 8, 1)
w = (h.conj().T @ h) * (8 / 128)
vals = np.real(w[np.tril_indices(8)])
e = compress_gram(vals, 8, cfg.gram, cfg.gram_payload)
print("\nfirst entries :", np.round(vals[:4], 3))
print("flags         :", e.offset_flag[:4])
print("payloads      :", e.payload[:4])
print("restored      :", decompress_gram(e, 8)[:4])

# Fixed against float on one 48-vector frame at 0 dB
c = qam(6)
n0 = snr_to_n0(8, 0.0)
rng = np.random.default_rng(3)
s = map_bits(rng.integers(0, 2, 48 * 48), c).reshape(48, 8).T
y = transmit(ChannelRealization(h, n0), s, rng)
fl = igs_detect(preprocess(ChannelRealization(h, n0), y), 1, c)
stats = SaturationStats()
fx = fixed_igs_detect(h, y, n0, 1, c, cfg, stats)
print("\nmax |s_fixed - s_float| :", np.abs(fx.s_hat - fl.s_hat).max().round(4))
# small LLRs round to zero in the 10-bit output; compare the others
nz = fx.llrs != 0
print("zero fixed LLRs         :", np.count_nonzero(~nz), "of", nz.size)
print("LLR sign agreement      :", np.mean(np.sign(fx.llrs[nz]) == np.sign(fl.llrs[nz])).round(4))
print("saturation events       :", stats.total_saturated)

# Without the power-of-two rescaling in the Gauss-Seidel unit the 15-bit
# operands overflow
stats_off = SaturationStats()
fixed_igs_detect(h, y, n0, 1, c, cfg.with_scaling(False), stats_off)
print("... without GS scaling  :", stats_off.total_saturated)
