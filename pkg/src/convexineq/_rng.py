"""Counter-based random number streams.

Every stochastic routine in this package draws from a Philox generator keyed
by ``(seed, tag)`` where the tag packs a purpose code, a repetition index, and
a chunk index.  Philox is counter-based: streams with distinct keys are
independent, and a stream's output depends only on its key, never on how many
other streams were consumed before it.  That makes every estimate in the
package reproducible bit-for-bit regardless of evaluation order or worker
count.

Purpose codes are module-local constants.  Keep them distinct across call
sites that share a user-facing seed, otherwise two logically independent
estimates would reuse the same stream.
"""

from __future__ import annotations

import numpy as np

# Samples are generated in fixed-size chunks so that parallel and serial
# generation of the same request produce identical output.
CHUNK = 65536

_MASK64 = (1 << 64) - 1


def rng_for(seed: int, purpose: int, rep: int = 0, chunk: int = 0) -> np.random.Generator:
    """Return the Philox stream for one (seed, purpose, rep, chunk) cell.

    ``purpose`` occupies the top byte of the tag, ``rep`` the next 24 bits,
    ``chunk`` the low 32 bits, so the three indices never collide.
    """
    if not (0 <= purpose < 256):
        raise ValueError(f"purpose code out of range: {purpose}")
    if rep < 0 or chunk < 0:
        raise ValueError("rep and chunk must be nonnegative")
    tag = ((purpose << 56) | ((rep & 0xFFFFFF) << 32) | (chunk & 0xFFFFFFFF)) & _MASK64
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, tag]))


def child_seed(seed: int, purpose: int, rep: int = 0) -> int:
    """Derive an integer seed for a nested routine that takes its own seed.

    The derived value is itself drawn from the parent's Philox stream, so
    nested estimators stay independent of each other and of the parent.
    """
    g = rng_for(seed, purpose, rep)
    return int(g.integers(0, 2**63 - 1))


def chunked(seed: int, purpose: int, rep: int, total: int, make):
    """Generate ``total`` rows in CHUNK-sized pieces with per-chunk streams.

    ``make(generator, count)`` must return an array whose leading dimension is
    ``count``.  The concatenated result is independent of how the chunks are
    scheduled, so a thread pool may process them in any order.
    """
    if total <= 0:
        raise ValueError("total must be positive")
    parts = []
    done = 0
    idx = 0
    while done < total:
        take = min(CHUNK, total - done)
        parts.append(make(rng_for(seed, purpose, rep, idx), take))
        done += take
        idx += 1
    if len(parts) == 1:
        return parts[0]
    return np.concatenate(parts, axis=0)
