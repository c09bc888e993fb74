"""Seeded, counter-based random streams.

Every stochastic component in the library draws from a Philox counter-based
generator keyed by (seed, stream_index).  The same key always yields the
same stream on any platform, which is what makes reports and experiment CSVs
byte-reproducible.  Reports embed :data:`GENERATOR_NAME` so the provenance
of random draws is recorded alongside the numbers.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "numpy.random.Philox4x64"


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for the pair (seed, index).

    Streams for distinct indices under the same seed are statistically
    independent (distinct Philox keys), so Monte Carlo trials can be keyed
    by trial index and still run in any order.
    """
    if seed < 0 or index < 0:
        raise ValueError(f"seed and index must be non-negative, got ({seed}, {index})")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
