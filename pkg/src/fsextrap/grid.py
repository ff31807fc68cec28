"""Sample grids, region masks, isotropic weighting and PSNR.

Sample grids are plain 2D ``float64`` numpy arrays indexed ``[m, n]`` (row,
column). Masks and weights are frozen dataclasses wrapping read-only arrays so
they can be shared between threads without copying.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

Rect = Tuple[int, int, int, int]  # (row, col, height, width)


class Label(enum.IntEnum):
    OUTSIDE = 0
    SUPPORT = 1
    MISSING = 2


SUPPORT = Label.SUPPORT
MISSING = Label.MISSING
OUTSIDE = Label.OUTSIDE


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_grid(samples, name: str = "samples") -> np.ndarray:
    """Validate and return ``samples`` as a 2D finite float64 array."""
    a = np.asarray(samples, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite amplitudes")
    return a


@dataclass(frozen=True)
class RegionMask:
    """Per-sample labels splitting a window into support, missing and outside."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValueError("labels must be 2D")
        if not np.isin(labels, [int(v) for v in Label]).all():
            raise ValueError("labels must be SUPPORT, MISSING or OUTSIDE")
        if not np.any(labels == SUPPORT):
            raise ValueError("no support samples")
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int8)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape

    @property
    def support(self) -> np.ndarray:
        return self.labels == SUPPORT

    @property
    def missing(self) -> np.ndarray:
        return self.labels == MISSING

    @property
    def area(self) -> np.ndarray:
        """Samples taking part in the extrapolation (support or missing)."""
        return self.labels != OUTSIDE

    def count(self, label: Label) -> int:
        return int(np.count_nonzero(self.labels == label))


def _paint(labels: np.ndarray, rects: Iterable[Rect], value: Label, what: str) -> np.ndarray:
    painted = np.zeros(labels.shape, dtype=bool)
    h, w = labels.shape
    for rect in rects:
        row, col, rh, rw = (int(v) for v in rect)
        if rh < 0 or rw < 0 or row < 0 or col < 0 or row + rh > h or col + rw > w:
            raise ValueError(f"{what} rect {tuple(rect)} outside {w}x{h} window")
        painted[row:row + rh, col:col + rw] = True
    labels[painted] = value
    return painted


def build_region_mask(window_w: int, window_h: int,
                      missing_rects: Sequence[Rect] = (),
                      outside_rects: Sequence[Rect] = ()) -> RegionMask:
    """Label a ``window_h`` x ``window_w`` window.

    Rects are ``(row, col, height, width)``. Samples covered by a missing rect
    become MISSING, samples covered by an outside rect become OUTSIDE and the
    rest is SUPPORT. Missing and outside rects must not overlap.
    """
    if window_w < 1 or window_h < 1:
        raise ValueError("window dimensions must be >= 1")
    labels = np.full((window_h, window_w), int(SUPPORT), dtype=np.int8)
    missing = _paint(labels, missing_rects, MISSING, "missing")
    outside = _paint(labels, outside_rects, OUTSIDE, "outside")
    if np.any(missing & outside):
        raise ValueError("missing and outside rects overlap")
    return RegionMask(labels)


@dataclass(frozen=True)
class WeightField:
    """Nonnegative per-sample weights, zero everywhere except on SUPPORT."""

    w: np.ndarray
    rho_hat: Optional[float]
    center: Tuple[float, float]

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 2 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite nonnegative 2D array")
        object.__setattr__(self, "w", _frozen(w))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.w.shape

    @property
    def total(self) -> float:
        return float(self.w.sum())


RhoOverride = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def build_isotropic_weight(mask: RegionMask, rho_hat: float = 0.8,
                           rho: Optional[RhoOverride] = None) -> WeightField:
    """Radially decaying weight ``rho_hat ** distance`` around the window center.

    The center is ``((height - 1) / 2, (width - 1) / 2)`` of the whole window.
    ``rho`` replaces the isotropic model: either an array of the window's shape
    or a callable ``rho(m, n)`` receiving coordinate grids. The override is
    still zeroed off the support.
    """
    if not 0.0 < rho_hat < 1.0:
        raise ValueError(f"rho_hat must lie in (0, 1), got {rho_hat}")
    h, w = mask.shape
    center = ((h - 1) / 2.0, (w - 1) / 2.0)
    m, n = np.mgrid[0:h, 0:w].astype(np.float64)
    if rho is None:
        dist = np.hypot(m - center[0], n - center[1])
        values = rho_hat ** dist
    elif callable(rho):
        values = np.asarray(rho(m, n), dtype=np.float64)
    else:
        values = np.asarray(rho, dtype=np.float64)
    if values.shape != mask.shape:
        raise ValueError("rho override does not match the mask shape")
    return WeightField(np.where(mask.support, values, 0.0), rho_hat, center)


def uniform_weight(mask: RegionMask) -> WeightField:
    """Weight 1 on every support sample (no spatial decay)."""
    h, w = mask.shape
    return WeightField(mask.support.astype(np.float64), None, ((h - 1) / 2.0, (w - 1) / 2.0))


def psnr(original, reconstructed, evaluate_on=None, peak: float = 255.0,
         mask: Optional[RegionMask] = None) -> float:
    """Peak signal-to-noise ratio in dB over the samples selected by ``evaluate_on``.

    ``evaluate_on`` is a boolean array, or a :class:`Label` looked up in
    ``mask``; ``None`` means every sample. Identical inputs give ``math.inf``.
    """
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstructed, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if evaluate_on is None:
        sel = np.ones(a.shape, dtype=bool)
    elif isinstance(evaluate_on, Label):
        if mask is None:
            raise ValueError("a label needs the region mask it refers to")
        sel = mask.labels == evaluate_on
    else:
        sel = np.asarray(evaluate_on, dtype=bool)
    if sel.shape != a.shape:
        raise ValueError("evaluation mask does not match grid shape")
    if not sel.any():
        raise ValueError("no samples carry the evaluated label")
    mse = float(np.mean((a[sel] - b[sel]) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)
