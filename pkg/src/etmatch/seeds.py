"""Named-stream seed derivation.

All randomness in a run flows from one 64-bit master seed. Components draw
from independently derived streams ("balance", "train", "tree:3", ...) so
results do not depend on the order in which components happen to consume
randomness.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def child_seed(master: int, stream: str) -> int:
    """Derive a 64-bit seed for a named stream from the master seed."""
    digest = hashlib.sha256(f"{master & MASK64}:{stream}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(master: int, stream: str) -> np.random.Generator:
    """A fresh PCG64 generator for the given stream."""
    return np.random.Generator(np.random.PCG64(child_seed(master, stream)))
