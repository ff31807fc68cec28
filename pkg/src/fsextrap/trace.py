"""Per-iteration trace records and their CSV export."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO, Tuple

TRACE_COLUMNS = ("nu", "u_k1", "u_k2", "abs_p_u", "abs_c_u", "gamma_effective", "weighted_energy")


@dataclass(frozen=True)
class TraceRecord:
    nu: int
    u: Tuple[int, int]
    p_u: complex
    c_u: complex
    weighted_energy: float
    degenerate: bool = False

    @property
    def gamma(self) -> complex:
        """Applied compensation factor ``c_u / p_u`` (complex in general)."""
        return self.c_u / self.p_u if self.p_u != 0 else 0.0

    @property
    def gamma_effective(self) -> float:
        return abs(self.c_u) / abs(self.p_u) if self.p_u != 0 else 0.0


def write_trace_csv(records: Iterable[TraceRecord], out: Optional[TextIO] = None,
                    comment: Optional[str] = None) -> str:
    """Write trace rows to ``out`` (or a string buffer) and return the text."""
    buf = out if out is not None else io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for rec in records:
        writer.writerow([rec.nu, rec.u[0], rec.u[1], repr(float(abs(rec.p_u))),
                         repr(float(abs(rec.c_u))), repr(float(rec.gamma_effective)),
                         repr(float(rec.weighted_energy))])
    return buf.getvalue() if out is None else ""
