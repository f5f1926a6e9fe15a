"""Monte Carlo coded-BER engine.

One frame is one codeword: information bits are encoded, interleaved,
mapped onto ``T`` consecutive ``n_t``-symbol vectors and sent over a single
channel realization (block fading). Every frame draws its randomness from
its own seed stream ``(seed, snr, frame index)``, so results do not depend
on how frames are distributed over workers.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import detect
from .channel import ChannelRealization, apply_kronecker, gen_iid, snr_to_n0, transmit
from .coding import encode, make_interleaver, deinterleave, interleave, viterbi_decode_soft
from .config import SimConfig
from .fxp import fixed_igs_detect
from .hwmodel import CostReport, latency_estimate
from .modem import map_bits

__all__ = [
    "CSV_COLUMNS",
    "BerRecord",
    "frame_layout",
    "detect_frame",
    "run_point",
    "run_sweep",
    "records_to_csv",
    "write_csv",
    "write_gnuplot",
    "wilson_interval",
]

CSV_COLUMNS = (
    "detector", "k", "n_r", "n_t", "mod", "code", "zeta_r", "zeta_t", "arith",
    "snr_db", "bits", "bit_errors", "ber", "frames", "frame_errors", "fer",
    "mults", "latency_cycles",
)



def wilson_interval(errors: int, trials: int, z: float = 1.959964) -> tuple:
    """Two-sided Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


@dataclass(frozen=True)
class BerRecord:
    """Error counts of one configuration at one SNR."""

    config: SimConfig
    snr_db: float
    bits: int
    bit_errors: int
    frames: int
    frame_errors: int
    mults: int | None = None
    cost: CostReport | None = None
    frame_error_sq: int | None = None

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    def ber_interval(self, z: float = 1.959964, method: str = "wilson") -> tuple:
        """95% (default `z`) confidence interval of the BER.

        ``method="wilson"`` treats every bit as an independent trial.
        ``method="frame"`` treats frames as the independent unit (bit errors
        within a coded frame come in bursts) and uses the normal interval of
        the per-frame error fraction.
        """
        if method == "wilson":
            return wilson_interval(self.bit_errors, self.bits, z)
        if method != "frame":
            raise ValueError(f"unknown interval method {method!r}")
        if self.frame_error_sq is None or self.frames < 2:
            return (0.0, 1.0)
        n = self.frames
        mean = self.bit_errors / n
        var = max(0.0, (self.frame_error_sq - n * mean * mean) / (n - 1))
        half = z * math.sqrt(var / n) / (self.bits / n)
        return (max(0.0, self.ber - half), min(1.0, self.ber + half))

    def row(self) -> dict:
        cfg = self.config
        kron = cfg.kronecker
        return {
            "detector": cfg.detector,
            "k": cfg.k,
            "n_r": cfg.n_r,
            "n_t": cfg.n_t,
            "mod": cfg.modulation,
            "code": cfg.code,
            "zeta_r": kron.zeta_r if kron else 0.0,
            "zeta_t": kron.zeta_t if kron else 0.0,
            "arith": cfg.arithmetic,
            "snr_db": self.snr_db,
            "bits": self.bits,
            "bit_errors": self.bit_errors,
            "ber": repr(self.ber),
            "frames": self.frames,
            "frame_errors": self.frame_errors,
            "fer": repr(self.fer),
            "mults": "" if self.mults is None else self.mults,
            "latency_cycles": "" if self.cost is None else self.cost.latency_cycles,
        }


@dataclass(frozen=True)
class FrameLayout:
    info_bits: int
    coded_bits: int
    vectors: int
    pad_bits: int


def frame_layout(cfg: SimConfig) -> FrameLayout:
    code = cfg.conv_code
    coded = cfg.bits_per_frame if code is None else code.coded_length(cfg.bits_per_frame)
    per_vector = cfg.n_t * cfg.constellation.bits_per_symbol
    vectors = -(-coded // per_vector)
    return FrameLayout(cfg.bits_per_frame, coded, vectors, vectors * per_vector - coded)


@lru_cache(maxsize=32)
def _interleaver(n: int) -> np.ndarray:
    return make_interleaver(n)


def _frame_rng(cfg: SimConfig, snr_db: float, frame: int) -> np.random.Generator:
    snr_key = int(round((snr_db + 1000.0) * 1000))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(snr_key, frame))))


def detect_frame(cfg: SimConfig, ch: ChannelRealization, y, counter=None) -> detect.DetectionResult:
    """Run the configured detector on one channel realization."""
    c = cfg.constellation
    if cfg.arithmetic == "fixed":
        return fixed_igs_detect(ch.h, y, ch.n0, cfg.k, c)
    g = detect.preprocess(ch, y)
    name = cfg.detector
    if name == "igs":
        return detect.igs_detect(g, cfg.k, c, counter)
    if name == "gs_zero":
        return detect.gs_detect(g, cfg.k, c, "zero", counter)
    if name == "gs_diag":
        return detect.gs_detect(g, cfg.k, c, "diag", counter)
    if name == "nse":
        return detect.nse_detect(g, cfg.k, c, counter)
    if name == "mmse_exact":
        return detect.exact_mmse_detect(g, c)
    raise ValueError(f"unknown detector {name!r}")


def _simulate_frames(cfg: SimConfig, snr_db: float, frames) -> list:
    """Bit-error count of each frame in `frames` (in order)."""
    layout = frame_layout(cfg)
    c = cfg.constellation
    code = cfg.conv_code
    perm = _interleaver(layout.coded_bits)
    n0 = snr_to_n0(cfg.n_t, snr_db)
    infos, llr_rows = [], []
    for frame in frames:
        rng = _frame_rng(cfg, snr_db, frame)
        info = rng.integers(0, 2, layout.info_bits, dtype=np.int8)
        coded = info if code is None else encode(code, info)
        tx = np.concatenate([interleave(coded, perm), rng.integers(0, 2, layout.pad_bits)])
        s = map_bits(tx, c).reshape(layout.vectors, cfg.n_t).T
        h = gen_iid(cfg.n_r, cfg.n_t, rng)
        if cfg.kronecker is not None:
            h = apply_kronecker(h, cfg.kronecker)
        if cfg.channel_norm == "load":
            h = h * math.sqrt(cfg.n_t / cfg.n_r)
        ch = ChannelRealization(h, n0)
        y = transmit(ch, s, rng)
        llrs = detect_frame(cfg, ch, y).llrs.reshape(-1)[: layout.coded_bits]
        infos.append(info)
        llr_rows.append(deinterleave(llrs, perm))
    llr_rows = np.asarray(llr_rows)
    if code is None:
        decoded = (llr_rows > 0).astype(np.int8)
    else:
        decoded = viterbi_decode_soft(code, llr_rows)
    return list(np.count_nonzero(decoded != np.asarray(infos), axis=1))


def _cost(cfg: SimConfig):
    if cfg.detector == "mmse_exact":
        return None, None
    if cfg.detector == "igs":
        report = latency_estimate(cfg.n_r, cfg.n_t, cfg.k)
        return report.complex_mults, report
    counter = detect.MultCounter()
    ch = ChannelRealization(np.eye(cfg.n_r, cfg.n_t), 1.0)
    detect_frame(cfg.with_(arithmetic="float"), ch, np.zeros(cfg.n_r), counter)
    return counter.core(), None


def run_point(cfg: SimConfig, snr_db: float, executor=None) -> BerRecord:
    """Simulate one SNR point with early stopping.

    Frames are processed in chunks of ``cfg.chunk_frames``. After each chunk
    the point stops if it has ``min_bits`` bits and ``target_errors`` errors,
    or once the frame budget is spent. The stop rule only looks at complete
    chunks, so the estimate uses exactly the bits counted up to the stop.
    """
    cfg.validate()
    errors_per_frame = []
    chunks = [
        range(start, min(start + cfg.chunk_frames, cfg.frames))
        for start in range(0, cfg.frames, cfg.chunk_frames)
    ]
    batch = max(1, cfg.workers) if executor is not None else 1
    bits_per_frame = cfg.bits_per_frame
    done = False
    for i in range(0, len(chunks), batch):
        group = chunks[i:i + batch]
        if executor is None:
            results = [_simulate_frames(cfg, snr_db, ch) for ch in group]
        else:
            results = list(executor.map(_simulate_frames, [cfg] * len(group), [snr_db] * len(group), group))
        for res in results:
            errors_per_frame.extend(res)
            bits = len(errors_per_frame) * bits_per_frame
            if bits >= cfg.min_bits and sum(errors_per_frame) >= cfg.target_errors:
                done = True
                break
        if done:
            break
    mults, cost = _cost(cfg)
    frames = len(errors_per_frame)
    return BerRecord(
        cfg,
        float(snr_db),
        frames * bits_per_frame,
        int(sum(errors_per_frame)),
        frames,
        int(sum(1 for e in errors_per_frame if e)),
        mults,
        cost,
        int(sum(int(e) * int(e) for e in errors_per_frame)),
    )


def run_sweep(cfg: SimConfig, csv_path=None, gnuplot_path=None, progress=None) -> list:
    """One :class:`BerRecord` per SNR point; optionally written to CSV/gnuplot files."""
    cfg.validate()
    records = []
    executor = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for snr in cfg.snr_db_list:
            rec = run_point(cfg, snr, executor)
            records.append(rec)
            if progress is not None:
                progress(rec)
    finally:
        if executor is not None:
            executor.shutdown()
    if csv_path is not None:
        write_csv(records, csv_path)
    if gnuplot_path is not None:
        write_gnuplot(records, gnuplot_path)
    return records


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def _write(path, text):
    try:
        directory = os.path.dirname(os.fspath(path))
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as err:
        raise OSError(f"cannot write {path}: {err}") from err


def write_csv(records, path):
    _write(path, records_to_csv(records))


def write_gnuplot(records, path):
    """Whitespace-separated blocks (one per configuration) for ``plot ... index i``."""
    blocks = {}
    for rec in records:
        blocks.setdefault(rec.config.name, []).append(rec)
    lines = []
    for name, recs in blocks.items():
        lines.append(f"# {name}")
        lines.append("# snr_db ber ber_lo ber_hi fer")
        for rec in recs:
            lo, hi = rec.ber_interval()
            lines.append(f"{rec.snr_db:g} {rec.ber:.6e} {lo:.6e} {hi:.6e} {rec.fer:.6e}")
        lines.append("")
        lines.append("")
    _write(path, "\n".join(lines))
