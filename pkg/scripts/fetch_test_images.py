#!/usr/bin/env python3
"""Rebuild data/lena.pgm and data/baboon.pgm from npm packages.

The ``lena`` package ships the 512x512 RGB image as a base64 ndarray inside
``lena.js`` (stored transposed); ``baboon-image`` ships ``baboon.png``. Both
are reduced to BT.601 luma and written as 8-bit PGM. Needs ``npm`` on PATH.
"""

import argparse
import base64
import hashlib
import io
import re
import subprocess
import sys
import tarfile
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from fsextrap.images import luma, write_pgm

EXPECTED = {
    "lena.pgm": "acbd08c6ba454a0511d5beed58ec5b30798213bded0827723b42fbcc226f6758",
    "baboon.pgm": "33016c1c747e89f86464f68fb448ec9a808425d6b65b74ebcbf17ff4b4107735",
}


def npm_pack(package, workdir):
    out = subprocess.run(["npm", "pack", package, "--silent"], cwd=workdir, check=True,
                         capture_output=True, text=True).stdout.strip().splitlines()[-1]
    return tarfile.open(Path(workdir) / out)


def lena_rgb(tar):
    src = tar.extractfile("package/lena.js").read().decode()
    payload = re.search(r"base64decode\(\s*'(.*?)'\s*\)", src, re.S).group(1)
    raw = np.frombuffer(base64.b64decode(payload.replace("\n", "")), dtype=np.uint8)
    return raw.reshape(512, 512, 3).transpose(1, 0, 2)


def baboon_rgb(tar):
    data = tar.extractfile("package/baboon.png").read()
    return np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        for package, name, decode in (("lena@1.0.0", "lena.pgm", lena_rgb),
                                      ("baboon-image@2.1.0", "baboon.pgm", baboon_rgb)):
            rgb = decode(npm_pack(package, tmp))
            write_pgm(out / name, luma(rgb.astype(float)))
            digest = hashlib.sha256((out / name).read_bytes()).hexdigest()
            status = "ok" if digest == EXPECTED[name] else "CHECKSUM MISMATCH"
            print(f"{name}: {digest} {status}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
