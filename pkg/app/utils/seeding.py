import hashlib
from typing import Any

import numpy as np


def derive_seed(*parts: Any) -> int:
    """
    Mix arbitrary coordinates into a 63-bit seed.

    The mix is a blake2b digest of the parts' reprs, so it is stable across
    processes and interpreter runs (unlike the builtin hash()).

    Args:
        parts: Global seed, repetition seed, cell coordinates, stream names, ...

    Returns:
        Non-negative integer seed
    """
    text = "|".join(repr(part.value if hasattr(part, "value") else part) for part in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def make_rng(*parts: Any) -> np.random.Generator:
    """Create a PCG64 generator seeded from derive_seed(*parts)."""
    return np.random.default_rng(derive_seed(*parts))
