"""Deterministic seed derivation.

Every stochastic operation in the package takes an integer seed; nested
operations derive child seeds from the parent seed plus a string path so
that runs are reproducible end to end and independent of call order.
"""

import hashlib

_MASK = (1 << 63) - 1


def derive_seed(seed: int, *parts) -> int:
    """Derive a child seed from `seed` and a path of labels/indices."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for p in parts:
        h.update(b"/")
        h.update(str(p).encode())
    return int.from_bytes(h.digest()[:8], "big") & _MASK
