"""Command-line front end: ``gsdetect sweep | presets | cost``.

Examples
--------
::

    gsdetect sweep --n-r 64 --n-t 8 --detector igs -k 1 --snr 0:6:1 --csv out.csv
    gsdetect sweep --config run.ini --gnuplot out.dat
    gsdetect presets fig3 --out-dir results/
    gsdetect cost --n-r 128 --n-t 8 -k 1 2 3
"""

from __future__ import annotations

import argparse
import os
import sys

from .channel import KroneckerSpec
from .config import ARITHMETIC, CHANNEL_NORMS, DETECTORS, ConfigError, SimConfig, dump_config, load_config, parse_snr_list
from .hwmodel import PIPELINE_OVERHEAD, SCHEDULES, count_mults, latency_estimate
from .presets import PRESETS, PROFILES, preset_configs
from .simulate import records_to_csv, run_sweep, write_csv, write_gnuplot

__all__ = ["main", "build_parser"]

# flag name -> SimConfig field
_SWEEP_FLAGS = {
    "n_r": int, "n_t": int, "modulation": str, "code": str, "detector": str, "k": int,
    "frames": int, "bits_per_frame": int, "seed": int, "arithmetic": str,
    "min_bits": int, "target_errors": int, "chunk_frames": int, "workers": int,
    "channel_norm": str, "label": str,
}


def _progress(rec):
    print(f"  {rec.config.name:>24s}  snr={rec.snr_db:6.2f} dB  ber={rec.ber:.3e}  "
          f"({rec.bit_errors}/{rec.bits} bits, {rec.frames} frames)", file=sys.stderr, flush=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsdetect", description="Soft-output massive-MIMO detector simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="BER/FER sweep of one configuration")
    sweep.add_argument("--config", help="INI file with a [sim] section; flags override its values")
    for name, typ in _SWEEP_FLAGS.items():
        flag = "-k" if name == "k" else "--" + name.replace("_", "-")
        kwargs = dict(type=typ, default=None, dest=name)
        if name == "detector":
            kwargs["choices"] = DETECTORS
        elif name == "arithmetic":
            kwargs["choices"] = ARITHMETIC
        elif name == "channel_norm":
            kwargs["choices"] = CHANNEL_NORMS
        sweep.add_argument(flag, **kwargs)
    sweep.add_argument("--snr", dest="snr_db_list", help="comma list or start:stop:step in dB")
    sweep.add_argument("--zeta-r", type=float, default=None, help="receive correlation (Kronecker)")
    sweep.add_argument("--zeta-t", type=float, default=None, help="transmit correlation (Kronecker)")
    sweep.add_argument("--csv", help="CSV output path (default: stdout)")
    sweep.add_argument("--gnuplot", help="optional gnuplot data file")
    sweep.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    sweep.add_argument("--quiet", action="store_true")

    pre = sub.add_parser("presets", help="run a stored comparison")
    pre.add_argument("name", choices=sorted(PRESETS))
    pre.add_argument("--profile", choices=sorted(PROFILES), default="desk",
                     help="'desk' (>=1e5 bits/point) or 'long' (>=1e7 bits/point)")
    pre.add_argument("--out-dir", default=".", help="directory for <name>.csv and <name>.dat")
    pre.add_argument("--seed", type=int, default=None)
    pre.add_argument("--workers", type=int, default=None)
    pre.add_argument("--frames", type=int, default=None, help="override the frame budget per point")
    pre.add_argument("--quiet", action="store_true")

    cost = sub.add_parser("cost", help="multiplication count and latency of the IGS detector")
    cost.add_argument("--n-r", type=int, default=128)
    cost.add_argument("--n-t", type=int, default=8)
    cost.add_argument("-k", type=int, nargs="+", default=[1, 2, 3])
    cost.add_argument("--schedule", choices=SCHEDULES, default="rescheduled")
    cost.add_argument("--stages", action="store_true", help="also print per-stage cycles")
    return parser


def _sweep_config(args) -> SimConfig:
    base = load_config(args.config) if args.config else SimConfig()
    changes = {name: getattr(args, name) for name in _SWEEP_FLAGS if getattr(args, name) is not None}
    if args.snr_db_list is not None:
        try:
            changes["snr_db_list"] = parse_snr_list(args.snr_db_list)
        except ValueError as err:
            raise ConfigError(f"bad --snr: {err}") from err
    if args.zeta_r is not None or args.zeta_t is not None:
        old = base.kronecker or KroneckerSpec()
        zr = old.zeta_r if args.zeta_r is None else args.zeta_r
        zt = old.zeta_t if args.zeta_t is None else args.zeta_t
        try:
            changes["kronecker"] = KroneckerSpec(zr, zt)
        except ValueError as err:
            raise ConfigError(str(err)) from err
    return base.with_(**changes).validate()


def _cmd_sweep(args) -> int:
    cfg = _sweep_config(args)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return 0
    records = run_sweep(cfg, args.csv, args.gnuplot, None if args.quiet else _progress)
    if args.csv is None:
        sys.stdout.write(records_to_csv(records))
    return 0


def _cmd_presets(args) -> int:
    overrides = {key: getattr(args, key) for key in ("seed", "workers", "frames") if getattr(args, key) is not None}
    configs = preset_configs(args.name, args.profile, **overrides)
    records = []
    for cfg in configs:
        records.extend(run_sweep(cfg, progress=None if args.quiet else _progress))
    csv_path = os.path.join(args.out_dir, f"{args.name}.csv")
    write_csv(records, csv_path)
    write_gnuplot(records, os.path.join(args.out_dir, f"{args.name}.dat"))
    print(csv_path)
    return 0


def _cmd_cost(args) -> int:
    print(f"n_r={args.n_r} n_t={args.n_t} schedule={args.schedule} overhead={PIPELINE_OVERHEAD}")
    print(f"{'k':>3} {'core_mults':>10} {'gain_mults':>10} {'latency':>8}")
    for k in args.k:
        mults = count_mults(args.n_t, k)
        report = latency_estimate(args.n_r, args.n_t, k, args.schedule)
        print(f"{k:>3} {mults.core:>10} {mults.gain:>10} {report.latency_cycles:>8}")
        if args.stages:
            print("    " + "  ".join(f"{name}={cycles}" for name, cycles in report.per_stage.items()))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"sweep": _cmd_sweep, "presets": _cmd_presets, "cost": _cmd_cost}
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"gsdetect: invalid configuration: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        # bad dimensions for the cost model and similar
        print(f"gsdetect: error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"gsdetect: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
