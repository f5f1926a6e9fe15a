"""Simulation configuration and its key/value file format.

A configuration file is an INI document with a single ``[sim]`` section whose
keys mirror :class:`SimConfig`::

    [sim]
    n_r = 128
    n_t = 8
    modulation = 64qam
    code = conv:7:133:171
    detector = igs
    k = 1
    snr_db_list = 0, 2, 4, 6
    zeta_r = 0.4
    zeta_t = 0.5
    seed = 1

``snr_db_list`` also accepts ``start:stop:step`` (stop inclusive).
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .channel import KroneckerSpec
from .coding import ConvCode
from .modem import get_constellation

__all__ = [
    "DETECTORS",
    "ARITHMETIC",
    "CHANNEL_NORMS",
    "ConfigError",
    "SimConfig",
    "parse_code",
    "parse_snr_list",
    "load_config",
    "dump_config",
]

DETECTORS = ("igs", "gs_zero", "gs_diag", "nse", "mmse_exact")
ARITHMETIC = ("float", "fixed")
CHANNEL_NORMS = ("unit", "load")


class ConfigError(ValueError):
    """Invalid simulation configuration; the message lists every problem."""


def parse_code(spec: str) -> ConvCode | None:
    """``"uncoded"`` or ``"conv:K:g1:g2"`` with octal generators."""
    spec = spec.strip().lower()
    if spec == "uncoded":
        return None
    parts = spec.split(":")
    if parts[0] != "conv" or len(parts) not in (1, 4):
        raise ConfigError(f"code must be 'uncoded' or 'conv:K:g1:g2', got {spec!r}")
    if len(parts) == 1:
        return ConvCode()
    try:
        return ConvCode(int(parts[1]), (int(parts[2], 8), int(parts[3], 8)))
    except ValueError as err:
        raise ConfigError(f"bad code {spec!r}: {err}") from err


def parse_snr_list(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    text = str(text).strip()
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        n = int(round((stop - start) / step)) + 1
        return tuple(float(v) for v in np.round(start + step * np.arange(n), 9))
    return tuple(float(v) for v in text.replace(",", " ").split())


@dataclass(frozen=True)
class SimConfig:
    """One detector configuration swept over SNR.

    `k` is the number of Gauss-Seidel sweeps, or the number of series terms
    for ``detector="nse"``. `frames` is the frame budget per SNR point; a
    point stops early once it has at least `min_bits` information bits and
    `target_errors` bit errors.

    `channel_norm` sets the channel entry variance: ``"unit"`` draws unit
    variance entries, ``"load"`` scales them to variance ``n_t / n_r`` so the
    Gram diagonal sits near ``n_t`` whatever the array size.
    """

    n_r: int = 128
    n_t: int = 8
    modulation: str = "64qam"
    code: str = "conv:7:133:171"
    detector: str = "igs"
    k: int = 1
    snr_db_list: tuple = (10.0,)
    kronecker: KroneckerSpec | None = None
    frames: int = 200
    bits_per_frame: int = 1146
    seed: int = 1
    arithmetic: str = "float"
    min_bits: int = 100_000
    target_errors: int = 200
    chunk_frames: int = 16
    workers: int = 1
    channel_norm: str = "unit"
    label: str = ""

    def validate(self) -> "SimConfig":
        errors = []
        if not self.n_r >= self.n_t >= 1:
            errors.append(f"need n_r >= n_t >= 1 (got n_r={self.n_r}, n_t={self.n_t})")
        if self.frames < 1:
            errors.append(f"frames must be >= 1 (got {self.frames})")
        if self.bits_per_frame < 1:
            errors.append(f"bits_per_frame must be >= 1 (got {self.bits_per_frame})")
        if not self.snr_db_list:
            errors.append("snr_db_list must not be empty")
        if self.detector not in DETECTORS:
            errors.append(f"detector must be one of {DETECTORS} (got {self.detector!r})")
        if self.k < 0 or (self.detector == "nse" and self.k < 1):
            errors.append(f"invalid k={self.k} for detector {self.detector!r}")
        if self.arithmetic not in ARITHMETIC:
            errors.append(f"arithmetic must be one of {ARITHMETIC} (got {self.arithmetic!r})")
        elif self.arithmetic == "fixed" and self.detector != "igs":
            errors.append("fixed-point arithmetic is only modelled for detector 'igs'")
        if self.channel_norm not in CHANNEL_NORMS:
            errors.append(f"channel_norm must be one of {CHANNEL_NORMS} (got {self.channel_norm!r})")
        if self.chunk_frames < 1 or self.workers < 1:
            errors.append("chunk_frames and workers must be >= 1")
        try:
            get_constellation(self.modulation)
        except ValueError as err:
            errors.append(str(err))
        try:
            parse_code(self.code)
        except ConfigError as err:
            errors.append(str(err))
        if errors:
            raise ConfigError("; ".join(errors))
        return self

    @property
    def constellation(self):
        return get_constellation(self.modulation)

    @property
    def conv_code(self) -> ConvCode | None:
        return parse_code(self.code)

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        suffix = "" if self.arithmetic == "float" else "-fixed"
        return f"{self.detector}-k{self.k}{suffix}"

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


_INT_KEYS = {f.name for f in fields(SimConfig) if f.type == "int"}


def load_config(path) -> SimConfig:
    """Read a ``[sim]`` INI file into a validated :class:`SimConfig`."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    if "sim" not in parser:
        raise ConfigError(f"{path}: missing [sim] section")
    section = dict(parser["sim"])
    return config_from_mapping(section, source=str(path))


def config_from_mapping(section: dict, source: str = "config") -> SimConfig:
    known = {f.name for f in fields(SimConfig)} | {"zeta_r", "zeta_t"}
    unknown = sorted(set(section) - known)
    if unknown:
        raise ConfigError(f"{source}: unknown keys {unknown}")
    kwargs = {}
    try:
        for key, value in section.items():
            if key in ("zeta_r", "zeta_t", "kronecker"):
                continue
            if key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key == "snr_db_list":
                kwargs[key] = parse_snr_list(value)
            else:
                kwargs[key] = str(value).strip()
        if "zeta_r" in section or "zeta_t" in section:
            kwargs["kronecker"] = KroneckerSpec(
                float(section.get("zeta_r", 0.0)), float(section.get("zeta_t", 0.0))
            )
    except ValueError as err:
        raise ConfigError(f"{source}: {err}") from err
    return SimConfig(**kwargs).validate()


def dump_config(cfg: SimConfig) -> str:
    """INI text that :func:`load_config` reads back to `cfg`."""
    lines = ["[sim]"]
    for key, value in asdict(cfg).items():
        if key == "kronecker":
            if value is not None:
                lines.append(f"zeta_r = {value['zeta_r']}")
                lines.append(f"zeta_t = {value['zeta_t']}")
            continue
        if key == "snr_db_list":
            value = ", ".join(f"{v:g}" for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"

