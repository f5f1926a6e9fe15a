"""Ready-made sweeps for the standard detector comparisons.

Each preset is a list of :class:`~gsdetect.config.SimConfig` objects that
share an antenna setup and SNR grid. Iterative baselines follow the fairness
rule used throughout: a Neumann-series detector with ``k + 2`` terms is
matched against Gauss-Seidel with ``k`` sweeps, since both then cost
``(k + 2) n_t^2`` multiplications.

=======  ===========================================================
fig1     128 x 16 i.i.d.: IGS k=1,2 vs NSE 3,4 terms vs exact MMSE
fig2     64 x 16 i.i.d.: same detectors at a higher loading factor
fig3     64 x 8 i.i.d.: effect of the initial solution on GS
fig4     128 x 16 Kronecker-correlated channels, zeta_t in {0.2, 0.5}
fig14    fixed-point vs floating-point IGS k=1, 128 x 8 and 64 x 8
=======  ===========================================================
"""

from __future__ import annotations

from .channel import KroneckerSpec
from .config import ConfigError, SimConfig, parse_snr_list

__all__ = ["PRESETS", "PROFILES", "nse_terms_for", "preset_configs"]

PROFILES = {
    # at least 1e5 information bits per point, early stop at 200 errors
    "desk": dict(frames=200, min_bits=100_000, target_errors=200),
    # long-run profile for low-BER points
    "long": dict(frames=20_000, min_bits=10_000_000, target_errors=1000),
}


def nse_terms_for(k_gs: int) -> int:
    """Series terms that give NSE the same multiplication budget as ``k_gs`` sweeps."""
    return k_gs + 2


def _iid_comparison(n_r, n_t, snr, **common):
    base = SimConfig(n_r=n_r, n_t=n_t, snr_db_list=parse_snr_list(snr), **common)
    out = []
    for k in (1, 2):
        out.append(base.with_(detector="igs", k=k))
        out.append(base.with_(detector="nse", k=nse_terms_for(k)))
    out.append(base.with_(detector="mmse_exact", k=0))
    return out


def _fig1(common):
    return _iid_comparison(128, 16, "0:6:1", **common)


def _fig2(common):
    return _iid_comparison(64, 16, "2:12:2", **common)


def _fig3(common):
    # "load" normalization puts the 64 x 8 waterfall inside 8..13 dB
    base = SimConfig(n_r=64, n_t=8, snr_db_list=parse_snr_list("8:13:1"), channel_norm="load", **common)
    return [
        base.with_(detector="igs", k=1),
        base.with_(detector="gs_zero", k=1),
        base.with_(detector="gs_zero", k=2),
        base.with_(detector="gs_diag", k=1),
        base.with_(detector="gs_diag", k=2),
        base.with_(detector="mmse_exact", k=0),
    ]


def _fig4(common):
    out = []
    for zeta_t in (0.2, 0.5):
        kron = KroneckerSpec(0.4, zeta_t)
        base = SimConfig(n_r=128, n_t=16, snr_db_list=parse_snr_list("0:20:2"), kronecker=kron, **common)
        tag = f"zt{zeta_t:g}"
        for k in (1, 2, 3):
            out.append(base.with_(detector="igs", k=k, label=f"igs-k{k}-{tag}"))
        for terms in (3, 4):
            out.append(base.with_(detector="nse", k=terms, label=f"nse-k{terms}-{tag}"))
        out.append(base.with_(detector="mmse_exact", k=0, label=f"mmse_exact-{tag}"))
    return out


def _fig14(common):
    out = []
    for n_r, snr in ((128, "-2:1:0.5"), (64, "1:5:1")):
        base = SimConfig(n_r=n_r, n_t=8, detector="igs", k=1, snr_db_list=parse_snr_list(snr), **common)
        for arith in ("float", "fixed"):
            out.append(base.with_(arithmetic=arith, label=f"igs-k1-{arith}-{n_r}x8"))
    return out


PRESETS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig14": _fig14}


def preset_configs(name: str, profile: str = "desk", **overrides) -> list:
    """Configurations of preset `name` under a run-length `profile`.

    Keyword `overrides` (for example ``seed`` or ``workers``) are applied to
    every configuration.
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    try:
        return [cfg.with_(**overrides).validate() for cfg in PRESETS[name](PROFILES[profile])]
    except TypeError as err:
        raise ConfigError(f"bad preset override: {err}") from err
