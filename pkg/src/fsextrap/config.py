"""Run configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

OUT_DIR_ENV = "FSEXTRAP_OUT_DIR"

# not part of the result fingerprint: they change where or how fast, not what
_UNFINGERPRINTED = {"out_dir", "threads", "repetitions", "warmup"}


def default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, "out")


@dataclass
class RunConfig:
    command: str = "conceal"
    input: Optional[str] = None
    out_dir: str = field(default_factory=default_out_dir)
    algorithm: str = "fofse"
    gamma: float = 0.2
    iterations: int = 200
    fft_size: int = 64
    rho_hat: float = 0.8
    block: int = 16
    support: int = 16
    pattern: Optional[str] = None
    blocks: int = 81
    seed: int = 0
    threads: int = 1
    stride: int = 10
    gammas: List[float] = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    repetitions: int = 5
    warmup: int = 1
    basis: str = "dft2d"
    full_factor: str = "modulus"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def merged(self, overrides: Dict[str, Any]) -> "RunConfig":
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(data)

    def fingerprint(self) -> str:
        data = {k: v for k, v in self.to_dict().items() if k not in _UNFINGERPRINTED}
        blob = json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def comment(self) -> str:
        return f"fsextrap {self.command} config={self.fingerprint()}"


def resolve(file_path: Optional[str], flags: Dict[str, Any]) -> RunConfig:
    """Defaults, then the config file, then explicit command-line flags."""
    base = RunConfig.load(file_path) if file_path else RunConfig()
    return base.merged(flags)
