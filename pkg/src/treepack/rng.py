"""Deterministic seed derivation.

Every randomized operation takes an explicit 64-bit seed.  Sub-streams are
derived by hashing the parent seed together with string/int tags, so that
concurrent consumers can draw from independent generators and results never
depend on scheduling order.
"""

from __future__ import annotations

import hashlib
import random

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *tags) -> int:
    """Derive a 64-bit child seed from a parent seed and a tag tuple."""
    h = hashlib.sha256()
    h.update(int(seed & MASK64).to_bytes(8, "little"))
    for tag in tags:
        h.update(repr(tag).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "little")


def stream(seed: int, *tags) -> random.Random:
    """A fresh generator for the sub-stream named by ``tags``."""
    return random.Random(derive_seed(seed, *tags))
