"""Named, seedable random streams.

Every consumer draws from its own stream, keyed by ``(seed, stream name)``,
so adding draws in one subsystem never perturbs another. The bit generator
is Philox (counter-based), which numpy implements identically on every
platform.
"""

import zlib

import numpy as np

RNG_ALGORITHM = "numpy.Philox4x64-10/SeedSequence(seed,crc32(stream))"

ARRIVALS = "arrivals"
PAYLOADS = "payloads"
COLD_START = "cold-start"
SERVICE = "service"
AUTOSCALE = "autoscale"


def stream(seed: int, name: str) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), key])))
