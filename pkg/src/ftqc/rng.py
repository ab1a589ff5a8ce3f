"""Deterministic random streams for reproducible experiments.

Every stochastic operation in the package takes an explicit
``numpy.random.Generator``.  Streams are derived from a counter-based
Philox generator keyed on ``(master_seed, stream_index)``, so the stream
consumed by trial ``i`` depends only on the seed and ``i`` — never on
how many worker processes were used or in which order trials ran.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def master_rng(seed: int) -> np.random.Generator:
    """Top-level stream for a run with the given seed."""
    return stream_rng(seed, 0)


def stream_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream ``index`` under ``seed`` (counter-based Philox)."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
