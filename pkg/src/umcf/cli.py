"""Command line entry point: ``umcf <subcommand> [flags]``.

Exit codes: 0 success/PASS, 1 FAIL, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import os
from pathlib import Path
import sys

from . import experiments as ex
from .cli_io import (ConfigError, DiagnosticsCSVWriter, RunConfig, export_level_set_mask,
                     load_config, write_field_dump, write_manifest, write_snapshot_2d)
from .geometry import initial_condition
from .grid import set_threads
from .solver import RunPlan, Sink, run

log = logging.getLogger("umcf")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class FileSink(Sink):
    """Streams diagnostics to CSV and writes dumps/images at snapshot steps."""

    def __init__(self, cfg: RunConfig, outdir: Path):
        self.cfg = cfg
        self.outdir = outdir
        self.csv = DiagnosticsCSVWriter(outdir / "diagnostics.csv")
        self.written: list[str] = []
        self.last_snapshot: int | None = None

    def record(self, rec):
        self.csv.write(rec)

    def snapshot(self, step, time, u):
        grid, eps = self.cfg.grid, self.cfg.params.eps
        self.last_snapshot = step
        stem = self.outdir / f"u_{step:08d}"
        write_field_dump(grid, u, stem.with_suffix(".f64"), eps=eps, step=step, time=time)
        self.written.append(stem.name + ".f64")
        if grid.dim == 2:
            write_snapshot_2d(grid, u, stem.with_suffix(".pgm"))
            self.written.append(stem.name + ".pgm")
        elif grid.dim == 3:
            mask = self.outdir / f"mask_{step:08d}.f64"
            export_level_set_mask(grid, u, mask, level=self.cfg.maskLevel,
                                  eps=eps, step=step, time=time)
            self.written.append(mask.name)

    def close(self):
        self.csv.close()


PRESET_DIR = Path(__file__).with_name("presets")


def preset_names() -> list[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.cfg"))


def resolve_config_path(path: Path) -> Path:
    """A path to an existing file, else the bundled preset of that name."""
    if path.exists():
        return path
    preset = PRESET_DIR / (path.stem + ".cfg")
    if path.parent == Path(".") and preset.exists():
        return preset
    raise FileNotFoundError(f"no config file {str(path)!r} and no preset of that name "
                            f"(presets: {', '.join(preset_names())})")


def cmd_run(args) -> int:
    cfg = load_config(resolve_config_path(args.config), args.override)
    if args.out:
        cfg.outputDir = args.out
    outdir = Path(cfg.outputDir) / cfg.experimentName
    outdir.mkdir(parents=True, exist_ok=True)
    write_manifest(cfg, outdir / "manifest.json")
    u0 = initial_condition(cfg.shape, cfg.grid, cfg.params.eps)
    plan = RunPlan(cfg.params, cfg.grid, cfg.steps, diagEvery=cfg.diagEvery,
                   snapshotEvery=cfg.snapshotEvery,
                   extinctionThreshold=cfg.extinctionThreshold,
                   radiusMode=cfg.radiusMode, dealias=cfg.dealias)
    sink = FileSink(cfg, outdir)
    try:
        state = run(u0, plan, sink)
        # the final state is always dumped, whatever the snapshot cadence
        if sink.last_snapshot != state.stepIndex:
            sink.snapshot(state.stepIndex, state.time, state.u)
    finally:
        sink.close()
    write_manifest(cfg, outdir / "manifest.json",
                   extra={"halted": state.halted, "finalStep": state.stepIndex,
                          "files": ["diagnostics.csv"] + sink.written})
    print(f"{cfg.experimentName}: {state.stepIndex} steps, halted={state.halted}, "
          f"output in {outdir}")
    return EXIT_FAIL if state.halted == "divergence" else EXIT_OK


def _report(result) -> int:
    print(result.report())
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_profile1d(args) -> int:
    return _report(ex.profile1d())


def cmd_circle2d(args) -> int:
    if args.quick:
        return _report(ex.circle2d(t_end=0.01))
    return _report(ex.circle2d())


def cmd_sphere3d(args) -> int:
    return _report(ex.sphere3d(N=128 if args.full else 64))


def cmd_sigma(args) -> int:
    return _report(ex.sigma_study())


def cmd_gamma(args) -> int:
    res = ex.gamma_limsup(truncation_scale=args.truncation_scale)
    for key, rows in res.data.items():
        print(f"  {key}:")
        for eps, total, target, rel in rows:
            print(f"    eps={eps:<8g} energy={total:.10f} target={target:.10f} rel_gap={rel:.3e}")
    return _report(res)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path,
                        help="run configuration (INI file or bundled preset name)")
    common.add_argument("--out", help="output directory (overrides run.outputDir)")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, e.g. model.sigmaRule=1*eps^2")
    common.add_argument("--threads", type=int, default=None,
                        help="FFT worker threads (default: $UMCF_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="umcf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run a configured simulation")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("validate-profile1d", parents=[common],
                       help="1D profile stationarity")
    p.set_defaults(func=cmd_profile1d)
    p = sub.add_parser("validate-circle2d", parents=[common], help="2D circle radius law")
    p.add_argument("--quick", action="store_true", help="reduced horizon t <= 0.01")
    p.set_defaults(func=cmd_circle2d)
    p = sub.add_parser("validate-sphere3d", parents=[common], help="3D sphere radius law")
    p.add_argument("--full", action="store_true", help="N = 128 instead of N = 64")
    p.set_defaults(func=cmd_sphere3d)
    p = sub.add_parser("sigma-study", parents=[common], help="sigma_eps stability study")
    p.set_defaults(func=cmd_sigma)
    p = sub.add_parser("gamma-limsup", parents=[common], help="recovery-profile energies")
    p.add_argument("--truncation-scale", type=float, default=1.0,
                   help="multiplier on the cut-off |log eps|")
    p.set_defaults(func=cmd_gamma)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = args.threads
    if threads is None:
        env = os.environ.get("UMCF_THREADS")
        try:
            threads = int(env) if env else 1
        except ValueError:
            print(f"umcf: error: UMCF_THREADS must be an integer, got {env!r}", file=sys.stderr)
            return EXIT_USAGE
    if threads < 1:
        print("umcf: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    set_threads(threads)
    if args.command == "run" and args.config is None:
        print("umcf: error: run requires --config", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"umcf: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"umcf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
