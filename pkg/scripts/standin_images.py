#!/usr/bin/env python3
"""Run the standard protocol on images bundled with scikit-image.

Useful as a sanity check when the classic test images are not at hand.
Writes PGM copies into a scratch directory and calls run_standard_scenario on them.
"""

import sys
import tempfile
from pathlib import Path

from skimage import data

from fsextrap.images import luma, write_pgm

sys.path.insert(0, str(Path(__file__).resolve().parent))
import run_standard_scenario  # noqa: E402


def main():
    tmp = Path(tempfile.mkdtemp(prefix="fsextrap-standin-"))
    paths = []
    for name, img in (("camera", data.camera()), ("astronaut", luma(data.astronaut())),
                      ("brick", data.brick()), ("grass", data.grass())):
        p = tmp / f"{name}.pgm"
        write_pgm(p, img)
        paths.append(str(p))
    return run_standard_scenario.main(paths + ["--out", "standin_table.csv"] + sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
