"""Named seed derivation so every random stream traces back to one user seed."""

import hashlib


def derive_seed(seed: int, label: str, index: int = 0) -> int:
    digest = hashlib.sha256(f"{seed}:{label}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")
