"""Command line front-end: ``bbisim run | slice | plot``."""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

from .config import ConfigError, parse_config
from .engine import CellSpec, Scenario, SweepError, run_cell, run_sweep
from .noise import NoiseKind
from .plots import MissingSliceError, render_plots
from .pulse_model import VariationSpec
from .report import ResultsWriter, read_results_csv, write_trials_csv

PROGRESS_PREFIX = "bbisim:"
RESULTS_NAME = "results.csv"
TRIALS_NAME = "trials.csv"


def _progress(kind: str, **fields) -> None:
    body = " ".join(f"{k}={v}" for k, v in fields.items())
    print(f"{PROGRESS_PREFIX}{kind} {body}", file=sys.stderr, flush=True)


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.workers is not None:
        cfg.worker_count = args.workers
    if args.out is not None:
        cfg.output_dir = Path(args.out)
    specs = cfg.cell_specs()
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    total = len(specs)
    _progress("start", cells=total, workers=cfg.worker_count, seed=cfg.master_seed, out=out)
    with ResultsWriter(out / RESULTS_NAME) as writer:
        def on_cell(cell):
            writer.write(cell)
            _progress("cell", **{
                "class": cell.dawber_class, "scenario": cell.scenario.value,
                "fs": f"{cell.fs_low:g}", "snr": f"{cell.snr_db:g}",
                "n": cell.n_trials, "nsem": f"{cell.final_nsem:.5f}",
                "rmse_ms": f"{cell.rmse_ms:.4f}", "capped": int(cell.capped),
                "elapsed_s": f"{cell.elapsed_s:.2f}", "done": f"{writer.rows}/{total}",
            })

        cells = run_sweep(specs, seed=cfg.master_seed, workers=cfg.worker_count,
                          on_cell=on_cell, collect_trials=cfg.emit_trials)
    if cfg.emit_trials:
        write_trials_csv(cells, out / TRIALS_NAME)
    if cfg.emit_plots:
        render_plots(cells, out / "figures")
    _progress("done", cells=len(cells), elapsed_s=f"{time.perf_counter() - started:.1f}",
              csv=out / RESULTS_NAME)
    return 0


def cmd_slice(args) -> int:
    spec = CellSpec(
        dawber_class=args.dawber_class,
        scenario=Scenario(args.scenario),
        fs_low=args.fs,
        snr_db=args.snr,
        noise_kind=NoiseKind(args.noise),
        variation=VariationSpec(args.variation_pct / 100.0),
        max_trials=args.max_trials,
    )
    cell = run_cell(spec, seed=args.seed, collect_trials=True)
    ae_ms = [1000.0 * t.abs_error for t in cell.trials]
    print(spec.label)
    rows = [
        ("n_trials", cell.n_trials),
        ("rmse_ms", f"{cell.rmse_ms:.4f}"),
        ("rmse_corrected_ms", f"{cell.rmse_corrected_ms:.4f}"),
        ("mean_ae_ms", f"{statistics.fmean(ae_ms):.4f}"),
        ("median_ae_ms", f"{statistics.median(ae_ms):.4f}"),
        ("max_ae_ms", f"{max(ae_ms):.4f}"),
        ("final_nsem", f"{cell.final_nsem:.6f}"),
        ("capped", int(cell.capped)),
        ("redrawn_delays", cell.redrawn_delays),
        ("elapsed_s", f"{cell.elapsed_s:.2f}"),
    ]
    for key, value in rows:
        print(f"{key}\t{value}")
    return 0


def cmd_plot(args) -> int:
    cells = read_results_csv(args.csv)
    if not cells:
        raise ValueError(f"{args.csv}: no result rows")
    for path in render_plots(cells, args.outdir, clip_ms=None if args.no_clip else 50.0):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbisim", description="Beat-to-beat interval error simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sweep described by a TOML config")
    p.add_argument("config", type=Path)
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--workers", type=int, help="override the worker count")
    p.add_argument("--out", type=Path, help="override the output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("slice", help="run a single cell and print trial statistics")
    p.add_argument("--class", dest="dawber_class", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--scenario", default=Scenario.EXACT.value, choices=[s.value for s in Scenario])
    p.add_argument("--fs", type=float, required=True, help="low sampling rate (Hz)")
    p.add_argument("--snr", type=float, required=True, help="SNR (dB)")
    p.add_argument("--noise", default=NoiseKind.PINK.value, choices=[k.value for k in NoiseKind])
    p.add_argument("--variation-pct", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-trials", type=int, default=200_000)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("plot", help="render figures from a results CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("outdir", type=Path)
    p.add_argument("--no-clip", action="store_true", help="do not clip RMSE axes at 50 ms")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print(f"bbisim: error: ConfigError: workers: expected a value >= 1, got {args.workers}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, MissingSliceError, SweepError, OSError, ValueError) as exc:
        print(f"bbisim: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("bbisim: error: Interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
