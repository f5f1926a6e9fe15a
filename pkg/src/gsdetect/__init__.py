"""Soft-output massive-MIMO uplink detection with an improved Gauss-Seidel solver.

Modules
-------
numerics
    Dense Hermitian linear algebra: Cholesky factor and triangular solves.
channel
    Rayleigh and Kronecker-correlated channels, AWGN, SNR conversion.
modem
    Gray-labelled square QAM and max-log bit metrics.
coding
    Rate-1/2 convolutional code, soft Viterbi decoder, interleaver.
detect
    Preprocessing, Neumann-series start, Gauss-Seidel sweeps and soft output.
fxp
    Bit-true fixed-point model of the detector pipeline.
hwmodel
    Multiplication count and cycle latency of the parallel architecture.
config, simulate, presets, cli
    Monte Carlo BER/FER harness and its command-line front end.
"""

from .channel import ChannelRealization, KroneckerSpec, gen_iid, snr_to_n0, transmit
from .config import ConfigError, SimConfig, load_config
from .detect import DetectionResult, exact_mmse_detect, gs_detect, igs_detect, nse_detect, preprocess
from .modem import get_constellation, qam
from .simulate import BerRecord, run_point, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BerRecord",
    "ChannelRealization",
    "ConfigError",
    "DetectionResult",
    "KroneckerSpec",
    "SimConfig",
    "exact_mmse_detect",
    "gen_iid",
    "get_constellation",
    "gs_detect",
    "igs_detect",
    "load_config",
    "nse_detect",
    "preprocess",
    "qam",
    "run_point",
    "run_sweep",
    "snr_to_n0",
    "transmit",
]
