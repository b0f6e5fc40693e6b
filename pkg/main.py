# Needlet block-thresholding toolkit: command-line entry point.
#
#   python main.py frame     --B 2 --j-max 4 [--grid-out grid.csv]
#   python main.py analyze   --j-max 5 --samples map.csv --out pyr.txt
#   python main.py synth     --input pyr.txt --out map.csv [--targets points.csv]
#   python main.py denoise   --input noisy.bin --out est.bin --n 4096 [--kappa 3]
#   python main.py bench     --r 2 --pi 2 --q 2 --loss-p 2 --n-grid 256,1024,4096,16384 [--kappa 0.8]
#   python main.py rate      --r 2 --pi 1 --p 6
#   python main.py calibrate --r 2 --pi 2 --q 2 --n-grid ... --gamma 0.01
#
# Every subcommand also takes --config FILE (JSON, hand-edit friendly); flags win.
# Exit codes: 0 ok, 1 validation error, 2 resource cap, 3 rate assertion failed.

import argparse
import math
import sys

import numpy as np
from pydantic import ValidationError

from bench.risk_bench import RiskBench
from estimation.block_threshold import EstimatorConfig, denoise, rate_zone, theoretical_rate
from needlets.needlet_frame import analyze, build_system, synthesize, synthesize_on_grid, window_sum_residual
from report_service import save_bench_outputs, save_bench_pdf
from sphere.cubature import band_limits
from sphere.sphere_geometry import angles_to_xyz
from utils.errors import RateAssertionError, ResourceCapError, ValidationFailure
from utils.file_io import read_map_csv, write_grid_csv, write_map_csv, write_rows_csv
from utils.pyramid_io import read_pyramid, write_pyramid
from utils.run_config import (
    AnalyzeConfig, BenchRunConfig, CalibrateConfig, DenoiseConfig, FrameConfig, RateConfig, SynthConfig,
    merge_config,
)

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_ASSERTION = 0, 1, 2, 3

# Sample positions must match the analysis grid to this many radians.
_GRID_MATCH = 1e-9


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _system_for(pyr):
    system = build_system(pyr.B, pyr.j_max)
    if system.counts != pyr.counts:
        raise ValidationFailure(f"pyramid counts {pyr.counts} do not match the B={pyr.B} frame {system.counts}")
    return system


# ── Subcommands ───────────────────────────────────────────────────────────────

def cmd_frame(cfg: FrameConfig) -> int:
    system = build_system(cfg.B, cfg.j_max)
    print(f"[Frame] B={cfg.B:g}, levels 0..{cfg.j_max}")
    print(f"{'j':>3} {'N_j':>8} {'band':>11} {'min λ':>11} {'max λ':>11} {'Σλ − 4π':>10} {'unitary':>9}")
    rows = []
    for j, grid in enumerate(system.grids):
        lo, hi = band_limits(cfg.B, j)
        xi = np.linspace(max(1.0, cfg.B ** j), cfg.B ** (j + 1), 257)
        resid = window_sum_residual(system.window, xi)
        w = grid.weights
        mass_err = float(w.sum() - 4.0 * math.pi)
        print(f"{j:>3} {grid.count:>8} {f'{lo}..{hi}':>11} {w.min():>11.4e} {w.max():>11.4e} {mass_err:>10.1e} {resid:>9.1e}")
        rows.append([j, grid.count, lo, hi, "%.17g" % w.min(), "%.17g" % w.max(), "%.17g" % mass_err, "%.17g" % resid])
    if cfg.out:
        write_rows_csv(cfg.out, ["j", "count", "l_min", "l_max", "weight_min", "weight_max", "mass_error", "unitary_residual"], rows)
        print(f"[Frame] summary → {cfg.out}")
    if cfg.grid_out:
        write_grid_csv(cfg.grid_out, system.analysis_grid)
        print(f"[Frame] analysis grid ({system.analysis_grid.count} points) → {cfg.grid_out}")
    return EXIT_OK


def cmd_analyze(cfg: AnalyzeConfig) -> int:
    theta, phi, values = read_map_csv(cfg.samples)
    system = build_system(cfg.B, cfg.j_max)
    grid = system.analysis_grid
    if len(values) != grid.count:
        raise ValidationFailure(f"{cfg.samples}: {len(values)} samples, the analysis grid has {grid.count}")
    gap = np.abs(angles_to_xyz(theta, phi) - grid.xyz).max()
    if gap > _GRID_MATCH:
        raise ValidationFailure(f"{cfg.samples}: sample positions differ from the analysis grid (max {gap:.2e})")
    pyr = analyze(system, values)
    write_pyramid(cfg.out, pyr)
    print(f"[Analyze] {sum(pyr.counts)} coefficients on levels 0..{cfg.j_max} → {cfg.out}")
    return EXIT_OK


def cmd_synth(cfg: SynthConfig) -> int:
    pyr = read_pyramid(cfg.input)
    system = _system_for(pyr)
    if cfg.targets:
        theta, phi, _ = read_map_csv(cfg.targets)
        values = synthesize(system, pyr, angles_to_xyz(theta, phi))
    else:
        grid = system.analysis_grid
        theta, phi = grid.theta, grid.phi
        values = synthesize_on_grid(system, pyr, grid)
    write_map_csv(cfg.out, theta, phi, values)
    print(f"[Synth] {len(values)} values → {cfg.out}")
    return EXIT_OK


def cmd_denoise(cfg: DenoiseConfig) -> int:
    pyr = read_pyramid(cfg.input)
    system = _system_for(pyr)
    est_cfg = EstimatorConfig(
        kappa=cfg.kappa, eta=cfg.eta, p_stat=cfg.p_stat, n=cfg.n, B=pyr.B, block_norm=cfg.block_norm,
    )
    print(f"[Denoise] J_n={est_cfg.J_n}  t_n={est_cfg.t_n:.6g}  threshold={est_cfg.threshold:.6g}")
    parts = system.partitions(cfg.eta)
    out, stats = denoise(pyr, parts, est_cfg)
    rows = []
    for j, (kept, total) in enumerate(zip(stats.kept_counts, stats.block_counts)):
        print(f"[Denoise] level {j}: kept {kept}/{total} blocks (ℓ={parts[j].block_size_target})")
        rows.append([j, total, kept, parts[j].block_size_target])
    write_pyramid(cfg.out, out)
    if cfg.diagnostics:
        write_rows_csv(cfg.diagnostics, ["j", "blocks", "kept", "block_size"], rows)
    print(f"[Denoise] → {cfg.out}")
    return EXIT_OK


def cmd_bench(cfg: BenchRunConfig) -> int:
    plan = cfg.plan()
    bench = RiskBench(plan, threads=cfg.threads)
    report = bench.run()
    csv_path, report_path = save_bench_outputs(report, plan, cfg.csv, cfg.report)
    print(f"[Bench] CSV → {csv_path}")
    print(f"[Bench] report → {report_path}")
    if cfg.pdf:
        print(f"[Bench] PDF → {save_bench_pdf(report, plan, bench.audit)}")
    for line in bench.audit.summary_lines():
        print(f"[Audit] {line}")
    if cfg.assert_rate is not None:
        report.assert_rate(cfg.assert_rate)
        print(f"[Bench] slope within {cfg.assert_rate:.0%} of −α")
    return EXIT_OK


def cmd_rate(cfg: RateConfig) -> int:
    alpha = theoretical_rate(cfg.r, cfg.pi, cfg.q, cfg.p, boundary=cfg.boundary)
    zone = rate_zone(cfg.r, cfg.pi, cfg.p, boundary=cfg.boundary)
    print(f"alpha={alpha:.17g} zone={zone}")
    return EXIT_OK


def cmd_calibrate(cfg: CalibrateConfig) -> int:
    bench = RiskBench(cfg.plan(), threads=cfg.threads)
    result = bench.calibrate(cfg.gamma, replications=cfg.calibration_replications)
    flag = " (grid exhausted)" if result.exhausted else ""
    print(f"kappa={result.kappa:.6g} frequency={result.frequency:.6g} n={result.n}{flag}")
    return EXIT_OK


# ── Argument parsing ──────────────────────────────────────────────────────────

def _plan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=float)
    p.add_argument("--pi", type=float)
    p.add_argument("--q", type=float, help="use inf for q = ∞")
    p.add_argument("--M", type=float)
    p.add_argument("--loss-p", type=float, dest="loss_p", help="use inf for the sup norm")
    p.add_argument("--n-grid", type=_int_list, dest="n_grid")
    p.add_argument("--replications", type=int)
    p.add_argument("--kappa", type=float, help="omit to calibrate κ at --gamma first")
    p.add_argument("--gamma", type=float, help="pure-noise exceedance target for calibration")
    p.add_argument("--eta", type=float)
    p.add_argument("--p-stat", type=int, dest="p_stat")
    p.add_argument("--block-norm", choices=["effective", "target"], dest="block_norm")
    p.add_argument("--seed", type=int)
    p.add_argument("--B", type=float)
    p.add_argument("--j-max", type=int, dest="j_max")
    p.add_argument("--truths-per-n", type=int, dest="truths_per_n")
    p.add_argument("--fixed-truth", action="store_true", default=None, dest="fixed_truth")
    p.add_argument("--noiseless", action="store_true", default=None)
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description="Spherical needlet block-thresholding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its values")
        return p

    p = add("frame", "build a needlet system and print per-level cubature statistics")
    p.add_argument("--B", type=float)
    p.add_argument("--j-max", type=int, dest="j_max")
    p.add_argument("--out")
    p.add_argument("--grid-out", dest="grid_out")

    p = add("analyze", "needlet coefficients from samples on the analysis grid")
    p.add_argument("--B", type=float)
    p.add_argument("--j-max", type=int, dest="j_max")
    p.add_argument("--samples")
    p.add_argument("--out")

    p = add("synth", "evaluate Σ β ψ from a pyramid file")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--targets")

    p = add("denoise", "block-threshold a noisy pyramid")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--n", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--p-stat", type=int, dest="p_stat")
    p.add_argument("--block-norm", choices=["effective", "target"], dest="block_norm")
    p.add_argument("--diagnostics")

    p = add("bench", "Monte Carlo risk bench over an n-grid")
    _plan_flags(p)
    p.add_argument("--csv")
    p.add_argument("--report")
    p.add_argument("--pdf", action="store_true", default=None)
    p.add_argument("--assert-rate", type=float, dest="assert_rate", help="relative slope tolerance, e.g. 0.25")

    p = add("rate", "print the theoretical exponent α(r, π, p)")
    p.add_argument("--r", type=float)
    p.add_argument("--pi", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--boundary", choices=["printed", "continuous"])

    p = add("calibrate", "calibrate κ on pure noise at the largest n")
    _plan_flags(p)
    p.add_argument("--calibration-replications", type=int, dest="calibration_replications")
    return parser


_BESOV_KEYS = ("r", "pi", "q", "M")

COMMANDS = {
    "frame": (FrameConfig, cmd_frame),
    "analyze": (AnalyzeConfig, cmd_analyze),
    "synth": (SynthConfig, cmd_synth),
    "denoise": (DenoiseConfig, cmd_denoise),
    "bench": (BenchRunConfig, cmd_bench),
    "rate": (RateConfig, cmd_rate),
    "calibrate": (CalibrateConfig, cmd_calibrate),
}


def _flags(args: argparse.Namespace) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.command in ("bench", "calibrate"):
        flags["besov"] = {k: flags.pop(k) for k in _BESOV_KEYS}
    return flags


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    model, handler = COMMANDS[args.command]
    try:
        cfg = merge_config(model, args.config, _flags(args))
        return handler(cfg)
    except ValidationError as e:
        print(f"[Error] invalid parameters:\n{e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationFailure as e:
        print(f"[Error] {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceCapError as e:
        print(f"[Error] resource cap: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except RateAssertionError as e:
        print(f"[Error] rate assertion failed: {e}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
