"""Engine dispatch: the fast spectral path for DFT2D, the sample-domain one otherwise."""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from .basis import BasisKind
from .grid import RegionMask, WeightField, build_isotropic_weight
from .spatial import Compensation, ExtrapolationConfig, SpatialExtrapolator
from .spectral import FastExtrapolator, init_spectra
from .trace import TraceRecord

ENGINES = ("auto", "spectral", "spatial")


def make_extrapolator(f, mask: RegionMask, config: ExtrapolationConfig,
                      weight: Optional[WeightField] = None, engine: str = "auto"):
    """Return an object with ``advance(n)``, ``model()`` and ``trace``."""
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    if weight is None:
        weight = build_isotropic_weight(mask, config.rho_hat)
    if engine == "auto":
        engine = "spectral" if config.basis is BasisKind.DFT2D else "spatial"
    if engine == "spatial":
        return SpatialExtrapolator(f, mask, config, weight)
    if config.basis is not BasisKind.DFT2D:
        raise ValueError("the spectral engine only supports the DFT2D basis")
    # both selection rules pick the same bin for DFT2D (constant weighted norm)
    spec = init_spectra(f, mask, weight, config.transform_size)
    gamma = None if config.compensation is Compensation.FULL else config.step_gamma
    return FastExtrapolator(spec, gamma, config.full_factor)


def extrapolate(f, mask: RegionMask, config: ExtrapolationConfig,
                weight: Optional[WeightField] = None,
                engine: str = "auto") -> Tuple[np.ndarray, List[TraceRecord]]:
    ex = make_extrapolator(f, mask, config, weight, engine)
    ex.advance(config.iterations)
    return ex.model(), list(ex.trace)
