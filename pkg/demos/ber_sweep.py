"""
A small coded BER sweep
=======================

Compares the improved Gauss-Seidel detector with a three-term Neumann series
(same multiplication budget) and exact MMSE on a 64 x 16 system. Each point
uses 40 frames of 1146 information bits, so the curves are rough; run
``gsdetect presets fig2`` for the full version.
"""

from gsdetect.config import SimConfig
from gsdetect.hwmodel import latency_estimate
from gsdetect.simulate import records_to_csv, run_sweep

base = SimConfig(n_r=64, n_t=16, snr_db_list=(4.0, 8.0, 12.0), frames=40, min_bits=10**9)

records = []
for det, k in (("igs", 1), ("nse", 3), ("mmse_exact", 0)):
    recs = run_sweep(base.with_(detector=det, k=k))
    print(f"{det:10s} k={k}: " + "  ".join(f"{r.snr_db:g} dB {r.ber:.1e}" for r in recs))
    records += recs

print()
print(records_to_csv(records))

cost = latency_estimate(128, 8, 1)
print("IGS at 128 x 8, one sweep:", cost.complex_mults, "multiplications,", cost.latency_cycles, "cycles")
