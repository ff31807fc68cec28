#!/usr/bin/env python3
"""PSNR over iterations for several constant factors plus FSE and OFSE references.

Thin wrapper over ``fsextrap sweep-gamma`` with defaults for a full sweep
(gammas 0.1 to 0.9, 400 iterations, checkpoints every 5).
"""

import sys

from fsextrap.cli import main
from fsextrap.images import find_image

if __name__ == "__main__":
    image = sys.argv[1] if len(sys.argv) > 1 else "lena"
    path = find_image(image) or image
    sys.exit(main(["sweep-gamma", "--input", str(path), "--gammas", "0.1", "0.3", "0.5", "0.7", "0.9",
                   "--iterations", "400", "--stride", "5", "--threads", "4", *sys.argv[2:]]))
