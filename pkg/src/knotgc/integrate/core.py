"""Deterministic chunked Monte-Carlo driver.

Samples are partitioned into fixed-size chunks; chunk c draws from a
Philox stream jumped c times off the base seed, so results are
bit-identical for a given (seed, samples, chunk size) regardless of how
many workers execute the chunks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CHUNK_SIZE = 1 << 15


@dataclass
class MCEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }
        out.update(self.extra)
        return out


def chunk_rng(seed, chunk_index, stream=0):
    """Counter-based generator for one chunk (and optional substream)."""
    bits = np.random.Philox(key=np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    return np.random.Generator(bits.jumped(int(stream) * (1 << 24) + int(chunk_index)))


def run_chunked(evaluate, samples, seed, stream=0, chunk_size=CHUNK_SIZE):
    """Accumulate mean and stderr of evaluate(rng, count) -> (count,) values.

    Chunks run sequentially; sample-level parallelism (the compiled
    kernel's OpenMP loop) happens inside ``evaluate``.  Results depend
    only on (seed, samples, chunk_size), never on thread count.
    """
    n_chunks = (samples + chunk_size - 1) // chunk_size
    sizes = [min(chunk_size, samples - i * chunk_size) for i in range(n_chunks)]

    def one(i):
        rng = chunk_rng(seed, i, stream)
        v = evaluate(rng, sizes[i])
        v = np.asarray(v, dtype=float)
        return v.sum(), (v * v).sum(), v.size

    parts = [one(i) for i in range(n_chunks)]

    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    count = sum(p[2] for p in parts)
    mean = s1 / count
    var = max(0.0, s2 / count - mean * mean)
    return mean, float(np.sqrt(var / count)), count
