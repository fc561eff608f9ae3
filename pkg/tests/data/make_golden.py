"""Regenerate the golden delta histogram (seed 2024, N = 10^5)."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parents[1]))

from test_acceptance import GOLDEN, GOLDEN_EDGES, delta_histogram  # noqa: E402

_, counts = delta_histogram(2024)
lines = ["# one-face (1,1) theta, total edge length 1, seed 2024, N = 100000", "left,right,count"]
lines += [f"{float(a)!r},{float(b)!r},{c}" for a, b, c in zip(GOLDEN_EDGES[:-1], GOLDEN_EDGES[1:], counts)]
GOLDEN.write_text("\n".join(lines) + "\n")
