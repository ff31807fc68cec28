"""Frequency-selective extrapolation of image signals.

FSE, orthogonality-deficiency-compensated FSE (OFSE) and its fast variant
(FOFSE), plus a block-loss concealment pipeline built on top of them.
"""

from .basis import BasisKind, BasisSet, DegenerateBasisError, build_gram, decompose, normalize_gram, synthesize
from .conceal import (Algorithm, BlockError, LossPattern, algorithm_config, conceal,
                      generate_grid_pattern, psnr_vs_iterations, read_pattern, write_pattern)
from .cost import count_ops
from .engine import extrapolate, make_extrapolator
from .grid import (MISSING, OUTSIDE, SUPPORT, Label, RegionMask, WeightField, build_isotropic_weight,
                   build_region_mask, psnr, uniform_weight)
from .spatial import Compensation, ExtrapolationConfig, Selection, SpatialExtrapolator
from .spectral import FastExtrapolator, init_spectra

__version__ = "0.1.0"

__all__ = [
    "Algorithm", "BasisKind", "BasisSet", "BlockError", "Compensation", "DegenerateBasisError",
    "ExtrapolationConfig", "FastExtrapolator", "Label", "LossPattern", "MISSING", "OUTSIDE",
    "RegionMask", "SUPPORT", "Selection", "SpatialExtrapolator", "WeightField",
    "algorithm_config", "build_gram", "build_isotropic_weight", "build_region_mask", "conceal",
    "count_ops", "decompose", "extrapolate", "generate_grid_pattern", "init_spectra",
    "make_extrapolator", "normalize_gram", "psnr", "psnr_vs_iterations", "read_pattern",
    "synthesize", "uniform_weight", "write_pattern",
]
