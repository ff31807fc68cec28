import numpy as np
import pytest

from fsextrap.grid import MISSING, OUTSIDE, SUPPORT, RegionMask


def random_case(rng, T, min_support=0.25):
    """Random window (at most T x T), labels and signal with enough support."""
    while True:
        h = int(rng.integers(max(2, T // 2), T + 1))
        w = int(rng.integers(max(2, T // 2), T + 1))
        labels = np.full((h, w), int(SUPPORT), dtype=np.int8)
        bh, bw = int(rng.integers(1, h // 2 + 1)), int(rng.integers(1, w // 2 + 1))
        r, c = int(rng.integers(0, h - bh + 1)), int(rng.integers(0, w - bw + 1))
        labels[r:r + bh, c:c + bw] = int(MISSING)
        holes = rng.uniform(size=(h, w)) < rng.uniform(0.0, 0.3)
        labels[holes & (labels == SUPPORT)] = int(OUTSIDE)
        if np.mean(labels == SUPPORT) >= min_support:
            break
    m, n = np.mgrid[0:h, 0:w]
    f = (100 + 60 * np.sin(2 * np.pi * (rng.uniform(0, 0.3) * m + rng.uniform(0, 0.3) * n))
         + rng.normal(0, 20, (h, w)))
    return f, RegionMask(labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(terminalreporter.config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """Record a one-line PASS/FAIL verdict for the end-of-run summary."""
    store = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(number, title, passed, detail=""):
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {number}: {verdict} {title}" + (f" ({detail})" if detail else "")
        store.append(line)
        print(line)
        return passed

    return record
