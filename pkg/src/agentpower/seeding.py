"""Named seed streams.

Every random draw in a command derives from one root seed. Child seeds are
keyed by a stream name plus integer coordinates, so inserting or appending
work in one stream never shifts the seeds handed out by another.
"""
from __future__ import annotations

import zlib

import numpy as np


def derive_seed(root: int, stream: str, *coords: int) -> int:
    key = (zlib.crc32(stream.encode("utf-8")), *(int(c) for c in coords))
    ss = np.random.SeedSequence(entropy=int(root), spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
