"""Deterministic per-task seed derivation."""
from __future__ import annotations

import hashlib


def derive_seed(master: int, *path) -> int:
    """63-bit seed from ``sha256(master || path)``; independent of thread scheduling."""
    h = hashlib.sha256(str(int(master)).encode())
    for p in path:
        h.update(b"/")
        h.update(str(p).encode())
    return int.from_bytes(h.digest()[:8], "big") >> 1
