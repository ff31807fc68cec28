"""Block-loss concealment: loss patterns, per-block extrapolation, reports."""

from __future__ import annotations

import csv
import enum
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .engine import make_extrapolator
from .grid import MISSING, OUTSIDE, SUPPORT, Rect, RegionMask, as_grid, build_isotropic_weight, psnr
from .spatial import Compensation, ExtrapolationConfig
from .trace import TraceRecord


class Algorithm(str, enum.Enum):
    FSE = "fse"
    OFSE = "ofse"
    FOFSE = "fofse"


class BlockError(RuntimeError):
    def __init__(self, index: int, rect: Rect, cause: Exception):
        super().__init__(f"block {index} at {tuple(rect)}: {cause}")
        self.index = index
        self.rect = rect


@dataclass(frozen=True)
class LossPattern:
    image_shape: Tuple[int, int]
    blocks: Tuple[Rect, ...]

    def __post_init__(self):
        h, w = self.image_shape
        blocks = tuple(tuple(int(v) for v in b) for b in self.blocks)
        for row, col, bh, bw in blocks:
            if bh < 1 or bw < 1 or row < 0 or col < 0 or row + bh > h or col + bw > w:
                raise ValueError(f"block {(row, col, bh, bw)} outside the {w}x{h} image")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "image_shape", (int(h), int(w)))

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def origins(self) -> List[Tuple[int, int]]:
        return [(b[0], b[1]) for b in self.blocks]

    @property
    def block_size(self) -> Optional[Tuple[int, int]]:
        sizes = {(b[2], b[3]) for b in self.blocks}
        return sizes.pop() if len(sizes) == 1 else None

    def missing_map(self) -> np.ndarray:
        lost = np.zeros(self.image_shape, dtype=bool)
        for row, col, bh, bw in self.blocks:
            lost[row:row + bh, col:col + bw] = True
        return lost


def generate_grid_pattern(image_shape: Tuple[int, int], block_size=(16, 16),
                          spacing: Optional[int] = None, count_limit: Optional[int] = 81,
                          support: int = 16) -> LossPattern:
    """Regular grid of isolated lost blocks.

    With ``spacing=None`` a ``n x n`` grid with ``n = isqrt(count_limit)`` is
    spread evenly so that every block keeps a full support frame inside the
    image. With an explicit ``spacing`` (origin-to-origin step) as many blocks
    as fit are placed, centered, and truncated to ``count_limit`` in row-major
    order. Either way the step must be at least ``block + support`` so that no
    lost block reaches into another one's support window.
    """
    h, w = (int(v) for v in image_shape)
    bh, bw = (block_size, block_size) if isinstance(block_size, int) else (int(v) for v in block_size)
    if h < bh or w < bw:
        raise ValueError(f"image {w}x{h} smaller than one {bw}x{bh} block")
    if count_limit is not None and count_limit < 0:
        raise ValueError("count_limit must be >= 0")
    if count_limit == 0:
        return LossPattern((h, w), ())

    def axis(extent: int, block: int):
        usable = extent - 2 * support - block
        if spacing is None:
            n = math.isqrt(count_limit) if count_limit is not None else 9
            if n <= 1:
                return [(extent - block) // 2]
            step = usable // (n - 1) if usable >= 0 else -1
            if step < block + support:
                raise ValueError(f"{n} blocks per axis do not fit isolated into {extent} samples")
            start = support + (usable - step * (n - 1)) // 2
            return [start + i * step for i in range(n)]
        if spacing < block + support:
            raise ValueError(f"spacing {spacing} < block + support ({block + support}): blocks would overlap")
        if usable < 0:
            raise ValueError("image too small for a block with its support frame")
        n = usable // spacing + 1
        start = support + (usable - spacing * (n - 1)) // 2
        return [start + i * spacing for i in range(n)]

    rows, cols = axis(h, bh), axis(w, bw)
    blocks = [(r, c, bh, bw) for r in rows for c in cols]
    if count_limit is not None:
        blocks = blocks[:count_limit]
    return LossPattern((h, w), tuple(blocks))


def read_pattern(path, image_shape: Tuple[int, int]) -> LossPattern:
    """Parse ``row col height width`` lines (``#`` starts a comment)."""
    blocks = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 'row col height width'")
        blocks.append(tuple(int(p) for p in parts))
    return LossPattern(tuple(image_shape), tuple(blocks))


def write_pattern(pattern: LossPattern, path) -> None:
    lines = [f"# loss pattern for a {pattern.image_shape[1]}x{pattern.image_shape[0]} image",
             "# row col height width"]
    lines += [" ".join(str(v) for v in b) for b in pattern.blocks]
    Path(path).write_text("\n".join(lines) + "\n")


def algorithm_config(algorithm, gamma: float = 0.2, iterations: int = 200,
                     transform_size: int = 64, rho_hat: float = 0.8,
                     **extra) -> ExtrapolationConfig:
    """Map FSE / OFSE / FOFSE onto an :class:`ExtrapolationConfig`."""
    algorithm = Algorithm(algorithm)
    comp = {Algorithm.FSE: Compensation.NONE, Algorithm.OFSE: Compensation.FULL,
            Algorithm.FOFSE: Compensation.CONSTANT}[algorithm]
    return ExtrapolationConfig(iterations=iterations, transform_size=transform_size,
                               rho_hat=rho_hat, compensation=comp,
                               gamma=gamma if algorithm is Algorithm.FOFSE else 1.0, **extra)


def block_window(image: np.ndarray, lost: np.ndarray, rect: Rect,
                 support: int) -> Tuple[np.ndarray, RegionMask, Tuple[int, int]]:
    """Cut the window around one lost block.

    Returns window samples (zero where unavailable), the region mask and the
    window origin in image coordinates. Samples outside the image or inside
    another lost block are OUTSIDE.
    """
    row, col, bh, bw = rect
    r0, c0 = row - support, col - support
    wh, ww = bh + 2 * support, bw + 2 * support
    H, W = image.shape
    f = np.zeros((wh, ww))
    labels = np.full((wh, ww), int(OUTSIDE), dtype=np.int8)
    ir0, ir1 = max(r0, 0), min(r0 + wh, H)
    ic0, ic1 = max(c0, 0), min(c0 + ww, W)
    sub = (slice(ir0 - r0, ir1 - r0), slice(ic0 - c0, ic1 - c0))
    f[sub] = image[ir0:ir1, ic0:ic1]
    labels[sub] = np.where(lost[ir0:ir1, ic0:ic1], int(OUTSIDE), int(SUPPORT))
    labels[support:support + bh, support:support + bw] = int(MISSING)
    f[labels != SUPPORT] = 0.0
    return f, RegionMask(labels), (r0, c0)


@dataclass
class BlockResult:
    index: int
    rect: Rect
    values: np.ndarray
    seconds: float
    checkpoints: List[Tuple[int, np.ndarray]] = field(default_factory=list)
    trace: Optional[List[TraceRecord]] = None


@dataclass
class ConcealmentReport:
    image: str
    algorithm: str
    gamma: float
    iterations: int
    psnr_db: float
    sec_per_block: float
    n_blocks: int
    config: Dict[str, object]
    best_psnr_db: Optional[float] = None
    best_iteration: Optional[int] = None
    curve: List[Tuple[int, float]] = field(default_factory=list)
    traces: Optional[List[List[TraceRecord]]] = None


def _conceal_block(index: int, rect: Rect, image: np.ndarray, lost: np.ndarray,
                   config: ExtrapolationConfig, support: int, stride: Optional[int],
                   keep_trace: bool, engine: str) -> BlockResult:
    try:
        t0 = time.perf_counter()
        f, mask, _ = block_window(image, lost, rect, support)
        weight = build_isotropic_weight(mask, config.rho_hat)
        ex = make_extrapolator(f, mask, config, weight, engine)
        bh, bw = rect[2], rect[3]
        crop = (slice(support, support + bh), slice(support, support + bw))
        checkpoints = []
        if stride:
            done = 0
            while done + stride <= config.iterations:
                ex.advance(stride)
                done += stride
                checkpoints.append((done, ex.model()[crop].copy()))
            ex.advance(config.iterations - done)
        else:
            ex.advance(config.iterations)
        g = ex.model()
        seconds = time.perf_counter() - t0
    except Exception as exc:  # engine errors carry the block identity
        raise BlockError(index, rect, exc) from exc
    return BlockResult(index, rect, g[crop].copy(), seconds, checkpoints,
                       list(ex.trace) if keep_trace else None)


def conceal(image, pattern: LossPattern, algorithm="fofse",
            config: Optional[ExtrapolationConfig] = None, support: int = 16,
            threads: int = 1, checkpoint_stride: Optional[int] = None,
            keep_traces: bool = False, name: str = "", engine: str = "auto"):
    """Conceal every block of ``pattern`` in ``image``.

    ``config`` overrides the parameters implied by ``algorithm`` (its
    compensation must agree). Only MISSING samples of the returned image
    differ from the input; PSNR is measured over those samples.
    """
    image = as_grid(image, "image")
    if tuple(image.shape) != tuple(pattern.image_shape):
        raise ValueError("pattern does not match the image dimensions")
    if checkpoint_stride is not None and checkpoint_stride < 1:
        raise ValueError("checkpoint stride must be >= 1")
    algorithm = Algorithm(algorithm)
    if config is None:
        config = algorithm_config(algorithm)
    lost = pattern.missing_map()
    jobs = list(enumerate(pattern.blocks))

    def work(job):
        i, rect = job
        return _conceal_block(i, rect, image, lost, config, support, checkpoint_stride,
                              keep_traces, engine)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    restored = image.copy()
    for res in results:
        row, col, bh, bw = res.rect
        restored[row:row + bh, col:col + bw] = res.values

    if results:
        quality = psnr(image, restored, lost)
        secs = float(np.mean([r.seconds for r in results]))
    else:
        quality, secs = math.inf, 0.0

    curve: List[Tuple[int, float]] = []
    if checkpoint_stride and results:
        for ci, (iteration, _) in enumerate(results[0].checkpoints):
            trial = image.copy()
            for res in results:
                row, col, bh, bw = res.rect
                trial[row:row + bh, col:col + bw] = res.checkpoints[ci][1]
            curve.append((iteration, psnr(image, trial, lost)))

    cfg = asdict(config)
    cfg = {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in cfg.items()}
    cfg["support"] = support
    report = ConcealmentReport(
        image=name, algorithm=algorithm.value, gamma=config.step_gamma,
        iterations=config.iterations, psnr_db=quality, sec_per_block=secs,
        n_blocks=len(results), config=cfg, curve=curve,
        traces=[r.trace for r in results] if keep_traces else None)
    if curve:
        best_i, best = max(curve, key=lambda t: (t[1], -t[0]))
        report.best_psnr_db, report.best_iteration = best, best_i
    return restored, report


@dataclass
class CurveTable:
    iterations: List[int]
    series: Dict[str, List[float]]

    def peak(self, name: str) -> Tuple[int, float]:
        vals = self.series[name]
        i = int(np.argmax(vals))
        return self.iterations[i], vals[i]


def series_label(algorithm, gamma: float) -> str:
    algorithm = Algorithm(algorithm)
    return f"FOFSE gamma={gamma:g}" if algorithm is Algorithm.FOFSE else algorithm.value.upper()


def psnr_vs_iterations(image, pattern: LossPattern, algorithms: Sequence[Tuple[str, float]],
                       max_iterations: int, stride: int, support: int = 16,
                       transform_size: int = 64, rho_hat: float = 0.8,
                       threads: int = 1) -> CurveTable:
    """PSNR at every ``stride`` iterations up to ``max_iterations``.

    ``algorithms`` lists ``(algorithm, gamma)`` pairs; each block runs once and
    is sampled at the checkpoints.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n_points = max_iterations // stride if max_iterations > 0 else 0
    if n_points == 0:
        return CurveTable([], {series_label(a, g): [] for a, g in algorithms})
    iterations = [stride * (i + 1) for i in range(n_points)]
    series: Dict[str, List[float]] = {}
    for alg, gamma in algorithms:
        cfg = algorithm_config(alg, gamma=gamma, iterations=iterations[-1],
                               transform_size=transform_size, rho_hat=rho_hat)
        _, rep = conceal(image, pattern, alg, cfg, support=support, threads=threads,
                         checkpoint_stride=stride)
        if len(pattern) == 0:
            series[series_label(alg, gamma)] = [math.inf] * n_points
        else:
            series[series_label(alg, gamma)] = [p for _, p in rep.curve]
    return CurveTable(iterations, series)


REPORT_COLUMNS = ("image", "algorithm", "gamma", "iterations", "psnr_db", "sec_per_block")


def _fmt_db(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def write_report_csv(reports: Iterable[ConcealmentReport], out: Optional[TextIO] = None,
                     comment: Optional[str] = None, timing: bool = True) -> str:
    buf = out if out is not None else io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        writer.writerow([r.image, r.algorithm, f"{r.gamma:g}", r.iterations, _fmt_db(r.psnr_db),
                         f"{r.sec_per_block:.6f}" if timing else ""])
    return buf.getvalue() if out is None else ""


def write_curve_csv(table: CurveTable, out: Optional[TextIO] = None,
                    comment: Optional[str] = None) -> str:
    buf = out if out is not None else io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "iteration", "psnr_db"])
    for name, values in table.series.items():
        for it, val in zip(table.iterations, values):
            writer.writerow([name, it, _fmt_db(val)])
    return buf.getvalue() if out is None else ""
