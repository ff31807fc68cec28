"""Analytic operation counts per extrapolated block for OFSE and FOFSE.

Counts assume fully precomputed ("runtime optimized") realizations. Both
variants additionally need ``2T`` FFTs of length ``T``, reported separately.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, TextIO, Union

Count = Union[int, Fraction]
CATEGORIES = ("MUL", "MEM", "ADD", "FUNC")
ALGORITHMS = ("ofse", "fofse")


def _exact(x: Fraction) -> Count:
    return int(x) if x.denominator == 1 else x


@dataclass(frozen=True)
class CostReport:
    algorithm: str
    M: int
    N: int
    T: int
    I: int
    MUL: Count
    MEM: Count
    ADD: Count
    FUNC: Count
    fft_transforms: int

    @property
    def total(self) -> Count:
        return _exact(Fraction(self.MUL) + self.MEM + self.ADD + self.FUNC)

    def category(self, name: str) -> Count:
        return getattr(self, name)


def count_ops(algorithm: str, M: int, N: int, T: int, I: int) -> CostReport:
    """Operation counts for one ``M x N`` block, ``T x T`` FFT and ``I`` iterations.

    ``I = 0`` is accepted as a boundary extension and leaves only the
    iteration-independent terms.
    """
    algorithm = algorithm.lower()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if min(M, N, T) < 1 or I < 0:
        raise ValueError("M, N, T must be >= 1 and I >= 0")
    MN = M * N
    T2 = Fraction(T * T)
    if algorithm == "ofse":
        mul = MN + I * (Fraction(49, 2) * T2 - 16)
        mem = 2 * MN + I * (10 * T2 + 2)
        add = I * (14 * T2 - 16)
        func = I * (Fraction(9, 2) * T2 - 1)
    else:
        mul = MN + I * (9 * T2 - 12)
        mem = 2 * MN + I * (Fraction(7, 2) * T2 + 10)
        add = I * (6 * T2 + 5)
        func = I * (Fraction(3, 2) * T2 + 4)
    return CostReport(algorithm, M, N, T, I, _exact(Fraction(mul)), _exact(Fraction(mem)),
                      _exact(Fraction(add)), _exact(Fraction(func)), 2 * T)


def write_cost_csv(iterations: Iterable[int], M: int, N: int, T: int,
                   out: Optional[TextIO] = None, comment: Optional[str] = None,
                   algorithms=ALGORITHMS) -> str:
    """Emit ``iterations,algorithm,category,ops`` rows (one per category)."""
    buf = out if out is not None else io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iterations", "algorithm", "category", "ops"])
    for I in iterations:
        for alg in algorithms:
            rep = count_ops(alg, M, N, T, I)
            for cat in CATEGORIES:
                writer.writerow([I, alg.upper(), cat, rep.category(cat)])
    return buf.getvalue() if out is None else ""
