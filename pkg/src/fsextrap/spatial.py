"""Sample-domain reference engine for frequency-selective extrapolation.

Every quantity is evaluated by explicit weighted sums over the window samples:
projection coefficients onto all basis functions, rows of the weighted Gram
matrix, residual updates. It works with any :class:`~fsextrap.basis.BasisSet`
and is the oracle the fast spectral engine is checked against. It is also the
honest cost baseline for the fully compensated variant, which has to know
every projection coefficient and a Gram row in each iteration.

For DFT2D the model is kept real by updating conjugate pairs together: the
selected bin ``u`` receives ``c`` and its partner receives ``conj(c)``;
self-conjugate bins take the real part of ``c``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .basis import BasisKind, BasisSet, DegenerateBasisError, GramMatrix, Index
from .grid import RegionMask, WeightField, as_grid, build_isotropic_weight
from .trace import TraceRecord

CONVERGED_ENERGY = 1e-12
DEGENERATE_TOL = 1e-12


class Selection(str, enum.Enum):
    MIN_DISTANCE = "min-distance"
    MAX_PORTION = "max-portion"


class Compensation(str, enum.Enum):
    NONE = "none"
    CONSTANT = "constant"
    FULL = "full"


FULL_FACTORS = ("modulus", "complex")


class Converged(Exception):
    """Nothing left to extract: the weighted residual has no energy."""


@dataclass(frozen=True)
class ExtrapolationConfig:
    """Parameters of one extrapolation run.

    ``full_factor`` controls how the per-selection factor of full
    compensation is applied to complex coefficients: ``"complex"`` uses the
    complex ratio as is, ``"modulus"`` keeps only its magnitude so the update
    does not rotate the coefficient's phase.
    """

    iterations: int = 200
    transform_size: int = 64
    rho_hat: float = 0.8
    selection: Selection = Selection.MAX_PORTION
    compensation: Compensation = Compensation.CONSTANT
    gamma: float = 0.2
    full_factor: str = "modulus"
    basis: BasisKind = BasisKind.DFT2D

    def __post_init__(self):
        object.__setattr__(self, "selection", Selection(self.selection))
        object.__setattr__(self, "compensation", Compensation(self.compensation))
        object.__setattr__(self, "basis", BasisKind(self.basis))
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.transform_size < 1:
            raise ValueError("transform_size must be >= 1")
        if not 0.0 < self.rho_hat < 1.0:
            raise ValueError("rho_hat must lie in (0, 1)")
        if self.compensation is Compensation.CONSTANT and not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.full_factor not in FULL_FACTORS:
            raise ValueError(f"full_factor must be one of {FULL_FACTORS}")

    @property
    def step_gamma(self) -> float:
        return 1.0 if self.compensation is Compensation.NONE else self.gamma

    def make_basis(self) -> BasisSet:
        return BasisSet(self.basis, self.transform_size)


@dataclass
class ModelState:
    coefficients: Dict[Index, complex]
    residual: np.ndarray
    support: np.ndarray
    nu: int = 0
    trace: List[TraceRecord] = field(default_factory=list)
    initial_energy: float = 0.0
    converged: bool = False


def weighted_energy(residual, weight: WeightField) -> float:
    return float(np.sum(weight.w * np.asarray(residual) ** 2))


def init_state(f, mask: RegionMask, weight: WeightField) -> ModelState:
    """Model ``g = 0`` and residual ``f`` on the support, zero elsewhere."""
    f = as_grid(f, "f")
    if f.shape != mask.shape or weight.shape != mask.shape:
        raise ValueError("signal, mask and weight shapes differ")
    support = mask.support
    residual = np.where(support, f, 0.0)
    return ModelState({}, residual, support, initial_energy=weighted_energy(residual, weight))


@lru_cache(maxsize=2)
def _window_matrix(basis: BasisSet, shape: Tuple[int, int]) -> np.ndarray:
    phi = basis.window_matrix(shape)
    phi.setflags(write=False)
    return phi


def weighted_norms(weight: WeightField, basis: BasisSet) -> np.ndarray:
    """``sum w * |phi_k|**2`` for every ``k`` (``T x T``)."""
    h, w = weight.shape
    s2 = np.abs(basis.factor) ** 2
    return s2[:, :h] @ weight.w @ s2[:, :w].T


def projection_numerators(residual, weight: WeightField, basis: BasisSet) -> np.ndarray:
    """``sum r * w * conj(phi_k)`` for every ``k`` (``T x T``)."""
    phi = _window_matrix(basis, weight.shape)
    rw = (np.asarray(residual) * weight.w).reshape(-1)
    num = np.conj(rw @ phi) if basis.is_complex else rw @ phi
    return num.reshape(basis.size, basis.size)


def project_coefficient(residual, weight: WeightField, basis: BasisSet, k: Index):
    """Weighted projection of ``residual`` onto ``phi_k``."""
    r = np.asarray(residual, dtype=np.float64)
    if r.shape != weight.shape:
        raise ValueError("residual and weight shapes differ")
    phi = basis.function(k, weight.shape)
    den = float(np.sum(weight.w * np.abs(phi) ** 2))
    if den <= 0.0:
        raise DegenerateBasisError("basis function vanishes on support")
    num = np.sum(r * np.conj(phi) * weight.w)
    return num / den if basis.is_complex else float(num.real) / den


def all_projections(residual, weight: WeightField, basis: BasisSet):
    """Projection coefficients onto every function plus the weighted norms."""
    num = projection_numerators(residual, weight, basis)
    norms = weighted_norms(weight, basis)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(norms > 0, num / np.where(norms > 0, norms, 1.0), 0.0)
    return p, norms


def _restrict(score: np.ndarray, basis: BasisSet, active: Optional[Sequence[Index]]) -> np.ndarray:
    keep = basis.canonical.copy()
    if active is not None:
        chosen = np.zeros_like(keep)
        for k1, k2 in active:
            chosen[k1, k2] = True
        keep &= chosen
    return np.where(keep, score, -np.inf)


def _argmax(score: np.ndarray) -> Optional[Index]:
    j = int(np.argmax(score))
    best = score.flat[j]
    if not best > 0.0:
        return None
    return divmod(j, score.shape[1])


def select_min_distance(residual, weight: WeightField, basis: BasisSet,
                        active: Optional[Sequence[Index]] = None) -> Index:
    """Index maximizing ``|p_k|**2 * sum w |phi_k|**2``.

    Ties go to the lowest row-major index. Raises :class:`Converged` if every
    candidate scores zero.
    """
    p, norms = all_projections(residual, weight, basis)
    u = _argmax(_restrict(np.abs(p) ** 2 * norms, basis, active))
    if u is None:
        raise Converged()
    return u


def select_max_portion(coeffs, basis: Optional[BasisSet] = None) -> Optional[Tuple[Index, Index]]:
    """Index of the largest ``|coeffs|`` and its conjugate partner.

    ``coeffs`` is the decomposition of the weighted residual. For complex
    families only the canonical member of each pair competes. Returns ``None``
    when all coefficients are zero.
    """
    c = np.asarray(coeffs)
    if basis is None:
        basis = BasisSet(BasisKind.DFT2D if np.iscomplexobj(c) else BasisKind.DCT2D, c.shape[0])
    u = _argmax(_restrict(np.abs(c), basis, None))
    if u is None:
        return None
    return u, basis.partner(u)


def gram_row(basis: BasisSet, weight: WeightField, u: Index) -> np.ndarray:
    """Row ``u`` of the weighted Gram matrix, ``K[u, l]`` for all ``l`` (``T x T``)."""
    phi = _window_matrix(basis, weight.shape)
    col = phi[:, u[0] * basis.size + u[1]]
    v = weight.w.reshape(-1) * np.conj(col)
    row = v @ phi
    if not basis.is_complex:
        row = row.real
    return row.reshape(basis.size, basis.size)


def compensate_full(p, u, k_hat) -> Tuple[complex, bool]:
    """Fully compensated estimate ``p_u**2 / sum_l p_l * K_hat[u, l]``.

    ``p`` holds projection coefficients, either ``T x T`` (``u`` a ``(k1, k2)``
    pair) or flat (``u`` an int). ``k_hat`` is the normalized row
    ``K_hat[u, :]`` laid out like ``p``, or a normalized :class:`GramMatrix`
    whose active set lists the entries of a flat ``p``.

    Returns ``(c_u, degenerate)``. A vanishing denominator falls back to the
    uncompensated ``c_u = p_u`` with ``degenerate=True``.
    """
    p = np.asarray(p)
    if isinstance(k_hat, GramMatrix):
        if not k_hat.normalized:
            raise ValueError("expected a normalized Gram matrix")
        key = u if isinstance(u, tuple) else k_hat.active[int(u)]
        i = k_hat.active.index((int(key[0]), int(key[1])))
        if p.ndim == 2:
            flat_p = np.array([p[a, b] for a, b in k_hat.active])
        else:
            flat_p = p
        p_u = flat_p[i]
        row = k_hat.entries[i]
    else:
        row = np.asarray(k_hat).reshape(-1)
        flat_p = p.reshape(-1)
        p_u = p[u] if p.ndim == 2 else p[int(u)]
    if row.shape != flat_p.shape:
        raise ValueError("Gram row and projection vector differ in length")
    denom = np.sum(flat_p * row)
    if abs(denom) < DEGENERATE_TOL * abs(p_u):
        return p_u, True
    return p_u * p_u / denom, False


def compensate_constant(p_u, gamma: float):
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return gamma * p_u


def step(state: ModelState, config: ExtrapolationConfig, basis: BasisSet,
         weight: WeightField) -> ModelState:
    """Apply one greedy update to ``state`` in place and return it."""
    num = projection_numerators(state.residual, weight, basis)
    norms = weighted_norms(weight, basis)
    if config.selection is Selection.MAX_PORTION:
        score = np.abs(num)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            score = np.where(norms > 0, np.abs(num) ** 2 / np.where(norms > 0, norms, 1.0), 0.0)
    u = _argmax(_restrict(score, basis, None))
    if u is None:
        state.converged = True
        raise Converged()
    if norms[u] <= 0:
        raise DegenerateBasisError("basis function vanishes on support")
    p_u = num[u] / norms[u]
    if not basis.is_complex:
        p_u = float(np.real(p_u))
    self_conj = basis.is_self_conjugate(u)

    degenerate = False
    if config.compensation is Compensation.FULL:
        with np.errstate(divide="ignore", invalid="ignore"):
            p_all = np.where(norms > 0, num / np.where(norms > 0, norms, 1.0), 0.0)
        row = gram_row(basis, weight, u)
        c_u, degenerate = compensate_full(p_all, u, row / row[u])
        if (config.full_factor == "modulus" and basis.is_complex and not self_conj
                and not degenerate):
            c_u = abs(c_u / p_u) * p_u
    else:
        c_u = compensate_constant(p_u, config.step_gamma)
    if basis.is_complex and self_conj:
        c_u = complex(np.real(c_u))

    phi = _window_matrix(basis, weight.shape)
    T = basis.size
    col = phi[:, u[0] * T + u[1]].reshape(weight.shape)
    if self_conj:
        delta = np.real(c_u * col)
    else:
        delta = 2.0 * np.real(c_u * col)
    state.residual = np.where(state.support, state.residual - delta, 0.0)

    state.coefficients[u] = state.coefficients.get(u, 0.0) + c_u
    if not self_conj:
        v = basis.partner(u)
        state.coefficients[v] = state.coefficients.get(v, 0.0) + np.conj(c_u)
    state.nu += 1
    energy = weighted_energy(state.residual, weight)
    state.trace.append(TraceRecord(state.nu, (int(u[0]), int(u[1])), complex(p_u), complex(c_u),
                                   float(energy), degenerate))
    if energy < CONVERGED_ENERGY * state.initial_energy:
        state.converged = True
    return state


def synthesize_coefficients(coefficients: Dict[Index, complex], basis: BasisSet,
                            shape: Tuple[int, int]) -> np.ndarray:
    """Evaluate ``sum c_k phi_k`` on a window of ``shape``."""
    T = basis.size
    c = np.zeros(T * T, dtype=complex if basis.is_complex else float)
    for (k1, k2), value in coefficients.items():
        c[k1 * T + k2] = value
    g = (_window_matrix(basis, shape) @ c).reshape(shape)
    if basis.is_complex:
        scale = max(1.0, float(np.max(np.abs(g.real))) if g.size else 1.0)
        if np.max(np.abs(g.imag)) > 1e-9 * scale:
            raise ValueError("conjugate symmetry violated")
        g = g.real
    return g


class SpatialExtrapolator:
    """Resumable wrapper around :func:`step` (same interface as the fast engine)."""

    def __init__(self, f, mask: RegionMask, config: ExtrapolationConfig,
                 weight: Optional[WeightField] = None):
        self.basis = config.make_basis()
        if max(mask.shape) > self.basis.size:
            raise ValueError(f"window {mask.shape} larger than transform size {self.basis.size}")
        self.config = config
        self.mask = mask
        self.weight = weight if weight is not None else build_isotropic_weight(mask, config.rho_hat)
        self.state = init_state(f, mask, self.weight)
        if self.state.initial_energy == 0.0:
            self.state.converged = True

    @property
    def trace(self) -> List[TraceRecord]:
        return self.state.trace

    def advance(self, iterations: int) -> List[TraceRecord]:
        start = len(self.state.trace)
        for _ in range(iterations):
            if self.state.converged:
                break
            try:
                step(self.state, self.config, self.basis, self.weight)
            except Converged:
                break
        return self.state.trace[start:]

    def model(self) -> np.ndarray:
        return synthesize_coefficients(self.state.coefficients, self.basis, self.mask.shape)


def run(f, mask: RegionMask, config: ExtrapolationConfig,
        weight: Optional[WeightField] = None) -> Tuple[np.ndarray, ModelState]:
    """Extrapolate ``f`` from the support of ``mask`` over the whole window.

    Runs ``config.iterations`` updates (fewer if the residual is exhausted)
    and returns the model ``g`` on the window together with the final state.
    """
    ex = SpatialExtrapolator(f, mask, config, weight)
    ex.advance(config.iterations)
    return ex.model(), ex.state
