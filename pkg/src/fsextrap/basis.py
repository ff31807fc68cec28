"""Separable 2D basis families over a ``T x T`` transform grid.

Two families are provided:

* ``DFT2D`` with ``phi_k[m, n] = exp(+2j*pi*(k1*m + k2*n)/T)``. ``decompose``
  is the unnormalized forward DFT (negative exponent) and ``synthesize`` the
  inverse with ``1/T**2`` scaling, so ``decompose(phi_k)`` is ``T**2`` at ``k``.
* ``DCT2D``, the orthonormal type-II cosine family (real valued).

Index ``k = (k1, k2)`` addresses functions; flat indices are row-major
``k1 * T + k2``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from .grid import WeightField

Index = Tuple[int, int]


class DegenerateBasisError(ValueError):
    """A basis function has zero weighted norm on the support."""


class BasisKind(str, enum.Enum):
    DFT2D = "dft2d"
    DCT2D = "dct2d"


def embed(a, size: int, dtype=None) -> np.ndarray:
    """Zero-pad a window-sized array into the top-left corner of ``size x size``."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("expected a 2D array")
    if a.shape[0] > size or a.shape[1] > size:
        raise ValueError(f"signal of shape {a.shape} larger than transform size {size}")
    if a.shape == (size, size):
        return np.array(a, dtype=dtype or a.dtype)
    out = np.zeros((size, size), dtype=dtype or a.dtype)
    out[:a.shape[0], :a.shape[1]] = a
    return out


@dataclass(frozen=True)
class BasisSet:
    kind: BasisKind
    size: int

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))
        if self.size < 1:
            raise ValueError("transform size must be >= 1")

    @property
    def is_complex(self) -> bool:
        return self.kind is BasisKind.DFT2D

    @property
    def n_functions(self) -> int:
        return self.size * self.size

    def indices(self):
        T = self.size
        return [(k1, k2) for k1 in range(T) for k2 in range(T)]

    @cached_property
    def factor(self) -> np.ndarray:
        """1D factor ``S[k, m]`` with ``phi_(k1,k2)[m, n] = S[k1, m] * S[k2, n]``."""
        T = self.size
        k = np.arange(T)[:, None]
        m = np.arange(T)[None, :]
        if self.is_complex:
            s = np.exp(2j * np.pi * ((k * m) % T) / T)
        else:
            s = np.cos(np.pi * (2 * m + 1) * k / (2 * T)) * np.sqrt(2.0 / T)
            s[0, :] = np.sqrt(1.0 / T)
        s.setflags(write=False)
        return s

    def function(self, k: Index, shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
        """Values of ``phi_k`` on the grid (optionally cropped to ``shape``)."""
        h, w = shape or (self.size, self.size)
        s = self.factor
        return np.outer(s[k[0], :h], s[k[1], :w])

    def partner(self, k: Index) -> Index:
        """Conjugate-pair partner (``k`` itself for real families)."""
        if not self.is_complex:
            return (int(k[0]), int(k[1]))
        T = self.size
        return ((-k[0]) % T, (-k[1]) % T)

    def is_self_conjugate(self, k: Index) -> bool:
        return self.partner(k) == (int(k[0]), int(k[1]))

    @cached_property
    def canonical(self) -> np.ndarray:
        """Boolean ``T x T`` map of indices eligible for selection.

        For DFT2D only the row-major-lower member of each conjugate pair is
        eligible, for real families every index is.
        """
        T = self.size
        if not self.is_complex:
            out = np.ones((T, T), dtype=bool)
        else:
            flat = np.arange(T * T).reshape(T, T)
            neg = (-np.arange(T)) % T
            out = flat <= flat[np.ix_(neg, neg)]
        out.setflags(write=False)
        return out

    @cached_property
    def self_conjugate(self) -> np.ndarray:
        T = self.size
        flat = np.arange(T * T).reshape(T, T)
        if not self.is_complex:
            out = np.ones((T, T), dtype=bool)
        else:
            neg = (-np.arange(T)) % T
            out = flat == flat[np.ix_(neg, neg)]
        out.setflags(write=False)
        return out

    def window_matrix(self, shape: Tuple[int, int]) -> np.ndarray:
        """Explicit matrix ``Phi[x, k]`` of every function sampled on a window.

        Rows run over the window samples (row-major), columns over the flat
        function index. Used by the sample-domain reference engine.
        """
        h, w = shape
        if h > self.size or w > self.size:
            raise ValueError(f"window {shape} larger than transform size {self.size}")
        s = self.factor
        phi = np.einsum("am,bn->mnab", s[:, :h], s[:, :w])
        return phi.reshape(h * w, self.n_functions)

    def decompose(self, signal) -> np.ndarray:
        return decompose(signal, self)

    def synthesize(self, coeffs) -> np.ndarray:
        return synthesize(coeffs, self)


def decompose(signal, basis: BasisSet) -> np.ndarray:
    """Coefficients of ``signal`` (zero-padded to ``T x T``) in ``basis``."""
    x = embed(np.asarray(signal), basis.size)
    if basis.is_complex:
        return np.fft.fft2(x)
    return sfft.dctn(np.real(x), type=2, norm="ortho")


def synthesize(coeffs, basis: BasisSet) -> np.ndarray:
    """Inverse of :func:`decompose` (complex for DFT2D, real for DCT2D)."""
    c = np.asarray(coeffs)
    if c.shape != (basis.size, basis.size):
        raise ValueError("coefficient array must be T x T")
    if basis.is_complex:
        return np.fft.ifft2(c)
    return sfft.idctn(c, type=2, norm="ortho")


@dataclass(frozen=True)
class GramMatrix:
    """Weighted scalar products ``K[u, l] = sum w * phi_l * conj(phi_u)``."""

    entries: np.ndarray
    active: Tuple[Index, ...]
    normalized: bool = False

    @property
    def order(self) -> int:
        return len(self.active)


MAX_GRAM_ORDER = 1024


def build_gram(basis: BasisSet, weight: WeightField,
               active: Optional[Sequence[Index]] = None) -> GramMatrix:
    """Materialize the weighted Gram matrix for the ``active`` functions.

    Only meant for small transforms; large ones use per-row evaluation.
    """
    active = tuple(basis.indices() if active is None else [(int(a), int(b)) for a, b in active])
    if len(active) > MAX_GRAM_ORDER:
        raise ValueError(f"refusing to materialize a Gram matrix of order {len(active)}")
    w = weight.w
    phi = basis.window_matrix(w.shape)
    cols = np.array([k1 * basis.size + k2 for k1, k2 in active], dtype=int)
    sub = phi[:, cols]
    weights = w.reshape(-1)
    entries = sub.conj().T @ (weights[:, None] * sub)
    if not basis.is_complex:
        entries = entries.real
    return GramMatrix(entries, active, False)


def normalize_gram(K: GramMatrix) -> GramMatrix:
    """Divide each row by its diagonal entry."""
    diag = np.diag(K.entries)
    if np.any(np.abs(diag) <= 0):
        raise DegenerateBasisError("degenerate basis function on support")
    return GramMatrix(K.entries / diag[:, None], K.active, True)
