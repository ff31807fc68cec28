"""Transform-domain engine for DFT2D extrapolation.

The weighted residual is kept as its spectrum ``R_w``. Subtracting
``c * phi_u`` from the residual on the support changes the weighted residual
by ``c * w * phi_u``, whose spectrum is the weight spectrum ``W`` circularly
shifted by ``u``. So after the two initial transforms (of ``f * w`` and of
``w``) an iteration costs one argmax and a shifted ``O(T**2)`` update; no
further forward transform is taken.

For full compensation the DFT Gram matrix is circulant,
``K[u, l] = W[(u - l) mod T]``, so the denominator ``sum_l p_l K_hat[u, l]``
is a single circular convolution of ``R_w`` with ``W`` evaluated at ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numpy.fft import fft2, ifft2

from .basis import BasisKind, BasisSet, embed
from .grid import RegionMask, WeightField, as_grid
from .spatial import DEGENERATE_TOL, FULL_FACTORS
from .trace import TraceRecord

CONVERGED_MAGNITUDE = 1e-12


@dataclass
class Spectrum:
    """Spectra of one extrapolation task on a ``T x T`` grid.

    ``R_w`` is the weighted-residual spectrum, ``W`` the weight spectrum and
    ``G`` the model spectrum, all in the unnormalized forward-DFT convention
    (``G[k] = T**2 * c_k``).
    """

    size: int
    R_w: np.ndarray
    W: np.ndarray
    G: np.ndarray
    window_shape: Tuple[int, int]
    weighted_energy: float
    initial_max: float
    forward_transforms: int = 0
    nu: int = 0
    converged: bool = False
    trace: List[TraceRecord] = field(default_factory=list)

    @property
    def weight_sum(self) -> float:
        return float(self.W[0, 0].real)


def init_spectra(f, mask: RegionMask, weight: WeightField, T: int) -> Spectrum:
    """Embed the window at the origin of a ``T x T`` grid and transform it."""
    f = as_grid(f, "f")
    if f.shape != mask.shape or weight.shape != mask.shape:
        raise ValueError("signal, mask and weight shapes differ")
    if mask.shape[0] > T or mask.shape[1] > T:
        raise ValueError(f"window {mask.shape} larger than transform size {T}")
    fs = np.where(mask.support, f, 0.0)
    R_w = fft2(embed(fs * weight.w, T))
    W = fft2(embed(weight.w, T))
    if not W[0, 0].real > 0:
        raise ValueError("weight has no positive sample")
    energy = float(np.sum(weight.w * fs * fs))
    return Spectrum(T, R_w, W, np.zeros((T, T), dtype=complex), mask.shape, energy,
                    float(np.max(np.abs(R_w))), forward_transforms=2)


class FastExtrapolator:
    """Stateful iteration over a :class:`Spectrum`; can be advanced repeatedly.

    ``gamma=None`` selects full compensation through the circulant Gram row.
    """

    def __init__(self, spec: Spectrum, gamma: Optional[float] = 0.2,
                 full_factor: str = "modulus"):
        if gamma is not None and not 0.0 < gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
        if full_factor not in FULL_FACTORS:
            raise ValueError(f"full_factor must be one of {FULL_FACTORS}")
        self.spec = spec
        self.gamma = gamma
        self.full_factor = full_factor
        T = spec.size
        basis = BasisSet(BasisKind.DFT2D, T)
        self._eligible = basis.canonical
        self._self_conj = basis.self_conjugate
        neg = (-np.arange(T)) % T
        # W[(k - u) mod T] is the window [T-u1:2T-u1, T-u2:2T-u2] of the tiled table
        self._w_tiled = np.tile(spec.W, (2, 2))
        self._w_neg_tiled = np.tile(spec.W[np.ix_(neg, neg)], (2, 2))

    @property
    def trace(self) -> List[TraceRecord]:
        return self.spec.trace

    def _shifted(self, table: np.ndarray, u: Tuple[int, int]) -> np.ndarray:
        T = self.spec.size
        return table[T - u[0]:2 * T - u[0], T - u[1]:2 * T - u[1]]

    def advance(self, iterations: int) -> List[TraceRecord]:
        """Run up to ``iterations`` more updates; returns the new trace records."""
        spec = self.spec
        T = spec.size
        T2 = float(T * T)
        W = spec.W
        W0 = spec.weight_sum
        R = spec.R_w
        stop = CONVERGED_MAGNITUDE * spec.initial_max
        new: List[TraceRecord] = []
        for _ in range(iterations):
            if spec.converged:
                break
            mag = np.where(self._eligible, np.abs(R), -1.0)
            j = int(np.argmax(mag))
            if not mag.flat[j] > stop:
                spec.converged = True
                break
            u = divmod(j, T)
            R_u = R[u]
            p_u = R_u / W0
            degenerate = False
            if self.gamma is None:
                denom = np.sum(R * self._shifted(self._w_neg_tiled, u))
                if abs(denom) < DEGENERATE_TOL * abs(R_u) * W0:
                    c_u, degenerate = p_u, True
                else:
                    c_u = R_u * R_u / denom
                    if self.full_factor == "modulus" and not self._self_conj[u]:
                        c_u = abs(c_u / p_u) * p_u
            else:
                c_u = self.gamma * p_u

            if self._self_conj[u]:
                c = complex(c_u.real)
                R -= c.real * self._shifted(self._w_tiled, u)
                spec.G[u] += T2 * c
                dot = c.real * R_u.real
                spec.weighted_energy += -2.0 * dot + c.real * c.real * W0
            else:
                c = complex(c_u)
                v = ((-u[0]) % T, (-u[1]) % T)
                R -= c * self._shifted(self._w_tiled, u) + np.conj(c) * self._shifted(self._w_tiled, v)
                spec.G[u] += T2 * c
                spec.G[v] += T2 * np.conj(c)
                two_u = ((2 * u[0]) % T, (2 * u[1]) % T)
                dot = 2.0 * (c * np.conj(R_u)).real
                dd = 2.0 * (c * c * np.conj(W[two_u])).real + 2.0 * abs(c) ** 2 * W0
                spec.weighted_energy += -2.0 * dot + dd
            spec.nu += 1
            rec = TraceRecord(spec.nu, (int(u[0]), int(u[1])), complex(p_u), c,
                              float(spec.weighted_energy), degenerate)
            spec.trace.append(rec)
            new.append(rec)
        return new

    def model(self) -> np.ndarray:
        return synthesize_model(self.spec)


def fast_iterate(spec: Spectrum, gamma: float, iterations: int) -> Tuple[Spectrum, List[TraceRecord]]:
    """Constant-factor iterations; mutates and returns ``spec``."""
    trace = FastExtrapolator(spec, gamma).advance(iterations)
    return spec, trace


def fast_iterate_full_od(spec: Spectrum, iterations: int,
                         full_factor: str = "modulus") -> Tuple[Spectrum, List[TraceRecord]]:
    """Fully compensated iterations using the circulant Gram row."""
    trace = FastExtrapolator(spec, None, full_factor).advance(iterations)
    return spec, trace


def synthesize_model(spec: Spectrum) -> np.ndarray:
    """Inverse transform of ``G`` cropped to the window (real valued)."""
    g = ifft2(spec.G)
    scale = max(1.0, float(np.max(np.abs(g.real))))
    if np.max(np.abs(g.imag)) > 1e-9 * scale:
        raise ValueError("conjugate symmetry violated")
    h, w = spec.window_shape
    return np.ascontiguousarray(g.real[:h, :w])
