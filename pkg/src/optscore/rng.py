"""Counter-based random streams keyed by (master seed, path of indices).

Every random draw in the package goes through :func:`stream`, so a replicate
identified by ``(seed, point, replicate)`` sees the same numbers regardless of
which worker runs it or in what order.
"""

from __future__ import annotations

import zlib
from typing import Union

import numpy as np

SeedLike = Union[int, tuple, list, np.random.Generator]


def _key_part(part) -> int:
    if isinstance(part, str):
        # stable across processes, unlike hash()
        return zlib.crc32(part.encode())
    part = int(part)
    if part < 0:
        raise ValueError("stream key components must be non-negative")
    return part


def stream(seed: SeedLike, *key) -> np.random.Generator:
    """Return an independent Philox generator for ``seed`` and ``key``.

    ``seed`` may be an int, a tuple ``(master, *key_prefix)`` or an existing
    Generator (returned unchanged when no key is given).
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive a keyed stream from a live Generator")
        return seed
    if isinstance(seed, (tuple, list)):
        master, prefix = seed[0], tuple(seed[1:])
    else:
        master, prefix = seed, ()
    if master is None:
        raise ValueError("a seed is required; entropy fallback is disabled")
    spawn_key = tuple(_key_part(k) for k in prefix + tuple(key))
    ss = np.random.SeedSequence(entropy=_key_part(master), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


def seed_record(seed: SeedLike, *key) -> tuple:
    """Plain-tuple description of a stream, suitable for manifests."""
    if isinstance(seed, np.random.Generator):
        return ("generator",)
    if isinstance(seed, (tuple, list)):
        return tuple(seed) + tuple(key)
    return (seed,) + tuple(key)
