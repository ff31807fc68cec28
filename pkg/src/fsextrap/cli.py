"""Command-line front end.

Subcommands: ``extrapolate``, ``conceal``, ``bench``, ``sweep-gamma`` and
``cost-model``. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import statistics
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import cost
from .conceal import (Algorithm, BlockError, algorithm_config, block_window, conceal,
                      generate_grid_pattern, psnr_vs_iterations, read_pattern,
                      write_curve_csv, write_pattern, write_report_csv)
from .config import RunConfig, resolve
from .engine import make_extrapolator
from .grid import build_isotropic_weight, psnr
from .images import read_image, write_pgm
from .trace import write_trace_csv

log = logging.getLogger("fsextrap")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    # defaults are None so that unset flags do not override the config file
    p.add_argument("--config", help="JSON run configuration (flags take precedence)")
    p.add_argument("--save-config", help="write the effective configuration here")
    p.add_argument("--input", help="input image (PGM, PNG, ...)")
    p.add_argument("--algorithm", choices=[a.value for a in Algorithm])
    p.add_argument("--gamma", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--fft-size", dest="fft_size", type=int)
    p.add_argument("--rho-hat", dest="rho_hat", type=float)
    p.add_argument("--block", type=int)
    p.add_argument("--support", type=int)
    p.add_argument("--pattern", help="loss pattern file ('row col height width' per line)")
    p.add_argument("--blocks", type=int, help="number of blocks for the generated grid pattern")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--stride", type=int, help="checkpoint stride for PSNR curves")
    p.add_argument("--basis", choices=["dft2d", "dct2d"])
    p.add_argument("--full-factor", dest="full_factor", choices=["modulus", "complex"])
    p.add_argument("--out-dir", dest="out_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fsextrap", description="Frequency-selective extrapolation and block-loss concealment")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("extrapolate", help="extrapolate a single window and dump its trace")
    _common(p)
    p.add_argument("--at", nargs=2, type=int, metavar=("ROW", "COL"),
                   help="origin of the lost block (default: image center)")

    p = sub.add_parser("conceal", help="conceal block losses in an image")
    _common(p)

    p = sub.add_parser("sweep-gamma", help="PSNR over iterations for several gamma values")
    _common(p)
    p.add_argument("--gammas", type=float, nargs="*")

    p = sub.add_parser("bench", help="time algorithms per block")
    _common(p)
    p.add_argument("--algorithms", nargs="+", choices=list(BENCH_ALGORITHMS), default=None)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--warmup", type=int)

    p = sub.add_parser("cost-model", help="analytic operation counts (CSV)")
    p.add_argument("--iterations", type=int, nargs="+", default=list(range(0, 51, 5)))
    p.add_argument("--block", type=int, default=16)
    p.add_argument("--fft-size", dest="fft_size", type=int, default=64)
    p.add_argument("--out-dir", dest="out_dir")
    return parser


# label -> (algorithm, engine)
BENCH_ALGORITHMS = {
    "fofse": ("fofse", "auto"),
    "fse": ("fse", "auto"),
    "ofse": ("ofse", "spatial"),
    "ofse-circulant": ("ofse", "spectral"),
}

_FLAG_KEYS = ("input", "algorithm", "gamma", "iterations", "fft_size", "rho_hat", "block",
              "support", "pattern", "blocks", "threads", "seed", "stride", "basis",
              "full_factor", "out_dir", "gammas", "repetitions", "warmup")


def _config_from_args(args) -> RunConfig:
    flags = {k: getattr(args, k, None) for k in _FLAG_KEYS}
    flags["command"] = args.command
    try:
        cfg = resolve(args.config, flags)
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    if args.save_config:
        cfg.save(args.save_config)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.iterations < 1:
        raise UsageError("--iterations must be >= 1")
    if not 0.0 < cfg.gamma <= 1.0:
        raise UsageError("--gamma must lie in (0, 1]")
    if not 0.0 < cfg.rho_hat < 1.0:
        raise UsageError("--rho-hat must lie in (0, 1)")
    if cfg.block < 1 or cfg.support < 0:
        raise UsageError("--block must be >= 1 and --support >= 0")
    if cfg.block + 2 * cfg.support > cfg.fft_size:
        raise UsageError("window (block + 2*support) exceeds --fft-size")
    if cfg.threads < 1 or cfg.stride < 1:
        raise UsageError("--threads and --stride must be >= 1")


def _extrap_config(cfg: RunConfig, algorithm: Optional[str] = None, gamma: Optional[float] = None,
                   iterations: Optional[int] = None):
    return algorithm_config(algorithm or cfg.algorithm,
                            gamma=cfg.gamma if gamma is None else gamma,
                            iterations=iterations or cfg.iterations,
                            transform_size=cfg.fft_size, rho_hat=cfg.rho_hat,
                            basis=cfg.basis, full_factor=cfg.full_factor)


def _load_input(cfg: RunConfig) -> np.ndarray:
    if not cfg.input:
        raise UsageError("--input is required")
    path = Path(cfg.input)
    if not path.is_file():
        raise FileNotFoundError(f"input image not found: {path}")
    return read_image(path)


def _pattern(cfg: RunConfig, shape):
    if cfg.pattern:
        if not Path(cfg.pattern).is_file():
            raise FileNotFoundError(f"pattern file not found: {cfg.pattern}")
        return read_pattern(cfg.pattern, shape)
    return generate_grid_pattern(shape, (cfg.block, cfg.block), count_limit=cfg.blocks,
                                 support=cfg.support)


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def synthetic_window(size: int, seed: int) -> np.ndarray:
    """Smooth texture with an edge: a deterministic stand-in for image content."""
    rng = np.random.default_rng(seed)
    m, n = np.mgrid[0:size, 0:size].astype(float)
    img = 128 + 40 * np.sin(2 * np.pi * (m * rng.uniform(0.02, 0.08) + n * rng.uniform(0.02, 0.08)))
    img += np.where(m + 0.5 * n > size * 0.8, 35.0, -35.0)
    img += rng.normal(0.0, 4.0, img.shape)
    return np.clip(img, 0, 255)


def cmd_extrapolate(cfg: RunConfig, at=None) -> int:
    if cfg.input:
        image = _load_input(cfg)
    else:
        image = synthetic_window(cfg.block + 2 * cfg.support, cfg.seed)
    h, w = image.shape
    if at is None:
        at = ((h - cfg.block) // 2, (w - cfg.block) // 2)
    rect = (at[0], at[1], cfg.block, cfg.block)
    lost = np.zeros(image.shape, dtype=bool)
    lost[rect[0]:rect[0] + cfg.block, rect[1]:rect[1] + cfg.block] = True
    f, mask, _ = block_window(image, lost, rect, cfg.support)
    econf = _extrap_config(cfg)
    weight = build_isotropic_weight(mask, econf.rho_hat)
    ex = make_extrapolator(f, mask, econf, weight)
    ex.advance(econf.iterations)
    g = ex.model()
    sl = (slice(cfg.support, cfg.support + cfg.block),) * 2
    orig = image[rect[0]:rect[0] + cfg.block, rect[1]:rect[1] + cfg.block]
    quality = psnr(orig, g[sl])
    out = _out(cfg)
    with open(out / "trace.csv", "w") as fh:
        write_trace_csv(ex.trace, fh, comment=cfg.comment())
    print(f"block {rect}: {len(ex.trace)} iterations, PSNR {quality:.2f} dB")
    return EXIT_OK


def cmd_conceal(cfg: RunConfig) -> int:
    image = _load_input(cfg)
    pattern = _pattern(cfg, image.shape)
    econf = _extrap_config(cfg)
    restored, report = conceal(image, pattern, cfg.algorithm, econf, support=cfg.support,
                               threads=cfg.threads, checkpoint_stride=None,
                               name=Path(cfg.input).stem)
    damaged = image.copy()
    damaged[pattern.missing_map()] = 0.0
    out = _out(cfg)
    stem = Path(cfg.input).stem
    write_pgm(out / f"{stem}_restored.pgm", restored)
    write_pgm(out / f"{stem}_damaged.pgm", damaged)
    write_pattern(pattern, out / f"{stem}_pattern.txt")
    with open(out / "report.csv", "w") as fh:
        write_report_csv([report], fh, comment=cfg.comment())
    print(f"{stem}: {report.algorithm} gamma={report.gamma:g} I={report.iterations} "
          f"blocks={report.n_blocks} PSNR={report.psnr_db:.2f} dB "
          f"({report.sec_per_block * 1e3:.1f} ms/block)")
    return EXIT_OK


def cmd_sweep_gamma(cfg: RunConfig) -> int:
    if not cfg.gammas:
        raise UsageError("sweep-gamma needs at least one --gammas value")
    if any(not 0.0 < g <= 1.0 for g in cfg.gammas):
        raise UsageError("gamma values must lie in (0, 1]")
    image = _load_input(cfg)
    pattern = _pattern(cfg, image.shape)
    series = [("fofse", g) for g in cfg.gammas] + [("fse", 1.0), ("ofse", 1.0)]
    table = psnr_vs_iterations(image, pattern, series, cfg.iterations, cfg.stride,
                               support=cfg.support, transform_size=cfg.fft_size,
                               rho_hat=cfg.rho_hat, threads=cfg.threads)
    out = _out(cfg)
    with open(out / "sweep_gamma.csv", "w") as fh:
        write_curve_csv(table, fh, comment=cfg.comment())
    for name in table.series:
        if table.iterations:
            it, val = table.peak(name)
            print(f"{name:>18}: peak {val:.2f} dB at {it} iterations")
    return EXIT_OK


def cmd_bench(cfg: RunConfig, algorithms: Optional[Sequence[str]]) -> int:
    if cfg.repetitions < 1:
        raise UsageError("--repetitions must be >= 1")
    if cfg.warmup < 0:
        raise UsageError("--warmup must be >= 0")
    algorithms = list(algorithms or ["fofse", "ofse"])
    size = cfg.block + 2 * cfg.support
    if cfg.input:
        image = _load_input(cfg)
        r0, c0 = (image.shape[0] - size) // 2, (image.shape[1] - size) // 2
        window = image[r0:r0 + size, c0:c0 + size]
    else:
        window = synthetic_window(size, cfg.seed)
    rect = (cfg.support, cfg.support, cfg.block, cfg.block)
    lost = np.zeros(window.shape, dtype=bool)
    lost[cfg.support:cfg.support + cfg.block, cfg.support:cfg.support + cfg.block] = True
    f, mask, _ = block_window(window, lost, rect, cfg.support)
    rows = []
    for label in algorithms:
        alg, engine = BENCH_ALGORITHMS[label]
        econf = _extrap_config(cfg, algorithm=alg)
        times = bench_block(f, mask, econf, engine, cfg.repetitions, cfg.warmup)
        ops = ""
        if alg in cost.ALGORITHMS:
            ops = cost.count_ops(alg, cfg.block, cfg.block, cfg.fft_size, cfg.iterations).total
        rows.append((label, engine, cfg.iterations, cfg.fft_size, statistics.fmean(times),
                     statistics.pstdev(times), len(times), ops))
    out = _out(cfg)
    with open(out / "bench.csv", "w") as fh:
        fh.write(f"# {cfg.comment()}\n")
        fh.write("algorithm,engine,iterations,fft_size,mean_sec,std_sec,repetitions,model_ops\n")
        for r in rows:
            fh.write(f"{r[0]},{r[1]},{r[2]},{r[3]},{r[4]:.6f},{r[5]:.6f},{r[6]},{r[7]}\n")
    for r in rows:
        print(f"{r[0]:>15} ({r[1]}): {r[4]:.4f} s/block (+-{r[5]:.4f}) over {r[6]} runs")
    return EXIT_OK


def bench_block(f, mask, econf, engine: str, repetitions: int, warmup: int = 1) -> List[float]:
    """Wall-clock seconds of ``repetitions`` full single-block extrapolations."""
    weight = build_isotropic_weight(mask, econf.rho_hat)
    times = []
    for i in range(warmup + repetitions):
        t0 = time.perf_counter()
        ex = make_extrapolator(f, mask, econf, weight, engine)
        ex.advance(econf.iterations)
        ex.model()
        if i >= warmup:
            times.append(time.perf_counter() - t0)
    return times


def cmd_cost_model(args) -> int:
    if any(i < 0 for i in args.iterations):
        raise UsageError("iterations must be >= 0")
    if args.block < 1 or args.fft_size < 1:
        raise UsageError("--block and --fft-size must be >= 1")
    cfg = RunConfig(command="cost-model", block=args.block, fft_size=args.fft_size,
                    iterations=max(args.iterations) if args.iterations else 0)
    text = cost.write_cost_csv(args.iterations, args.block, args.block, args.fft_size,
                               comment=cfg.comment() + f" iterations={','.join(map(str, args.iterations))}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "cost_model.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "cost-model":
            return cmd_cost_model(args)
        cfg = _config_from_args(args)
        _validate(cfg)
        if args.command == "extrapolate":
            return cmd_extrapolate(cfg, args.at)
        if args.command == "conceal":
            return cmd_conceal(cfg)
        if args.command == "sweep-gamma":
            return cmd_sweep_gamma(cfg)
        if args.command == "bench":
            return cmd_bench(cfg, args.algorithms)
    except UsageError as exc:
        print(f"fsextrap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlockError as exc:
        print(f"fsextrap: extrapolation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"fsextrap: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
