"""Counter-based deterministic random number streams.

Every random quantity in the package is a pure function of a 64-bit key
and a counter, built from the splitmix64 output function. This gives
three properties the simulator relies on:

  * results are reproducible from seeds alone, independent of numpy's
    global state or generator version,
  * per-node draws are a pure function of (seed, node, step), so node
    updates can be evaluated in any order (or in parallel) and produce
    bit-identical results,
  * independent substreams (graph attempts, assignment, sweep points)
    are derived by key mixing instead of by consuming a shared stream.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1

#: splitmix64 stream increment
GOLDEN = 0x9E3779B97F4A7C15
#: increment for per-draw substreams (rejection samplers)
_SUBSTREAM = 0xD1B54A32D192ED03
#: multipliers of the splitmix64 finalizer
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Domain tags keep seed-derived substreams of different subsystems apart.
DOMAIN_GRAPH = 0x01
DOMAIN_DYNAMICS = 0x02
DOMAIN_ASSIGNMENT = 0x03
DOMAIN_BASELINE = 0x04
DOMAIN_SWEEP = 0x05


def mix64(x: int) -> int:
    """splitmix64 finalizer on a Python int, modulo 2**64."""
    x &= _MASK
    x ^= x >> 30
    x = (x * _M1) & _MASK
    x ^= x >> 27
    x = (x * _M2) & _MASK
    x ^= x >> 31
    return x


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over a uint64 array."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_M1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_M2)
    x ^= x >> np.uint64(31)
    return x


def derive_key(key: int, index: int) -> int:
    """Derive an independent stream key from (key, index).

    Uses a different increment than value generation so derived keys do
    not collide with stream outputs.
    """
    return mix64(key ^ ((index + 1) * _SUBSTREAM & _MASK))


def unit_from_u64(u: int) -> float:
    """Map a 64-bit word to a float in [0, 1) using the top 53 bits."""
    return (u >> 11) * 2.0**-53


def unit_from_u64_array(u: np.ndarray) -> np.ndarray:
    return (u >> np.uint64(11)) * 2.0**-53


def counter_u64(key: int, counter: int) -> int:
    """Stream value of `key` at position `counter` (splitmix64 sequence)."""
    return mix64((key + (counter + 1) * GOLDEN) & _MASK)


def counter_u64_array(key: int, start: int, count: int) -> np.ndarray:
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return mix64_array(np.uint64(key & _MASK) + counters * np.uint64(GOLDEN))


def node_step_u64(key: int, step: int, n: int) -> np.ndarray:
    """One 64-bit word per node for a given time step.

    Equal to ``counter_u64(derive_key(key, step), node)`` for each node,
    computed vectorized. Thread-count and evaluation-order independent.
    """
    return counter_u64_array(derive_key(key, step), 0, n)


def node_step_u64_scalar(key: int, step: int, node: int) -> int:
    """Scalar equivalent of one entry of :func:`node_step_u64`."""
    return counter_u64(derive_key(key, step), node)


def substream_u64_array(bases: np.ndarray, draw: int) -> np.ndarray:
    """The `draw`-th word of the per-element substreams rooted at `bases`.

    Used by rejection samplers that consume a variable number of words
    per element; `draw` starts at 1.
    """
    return mix64_array(bases + np.uint64((draw * _SUBSTREAM) & _MASK))


class CounterStream:
    """Sequential view over a counter-based stream.

    A thin stateful convenience for algorithms that are inherently
    sequential (edge rewiring, subset sampling). The state is just the
    counter, so the stream stays a pure function of (key, counter).
    """

    def __init__(self, key: int):
        self.key = key & _MASK
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return counter_u64(self.key, self.counter - 1)

    def next_unit(self) -> float:
        return unit_from_u64(self.next_u64())

    def u64_array(self, count: int) -> np.ndarray:
        out = counter_u64_array(self.key, self.counter, count)
        self.counter += count
        return out

    def unit_array(self, count: int) -> np.ndarray:
        return unit_from_u64_array(self.u64_array(count))

    def randint_below(self, n: int) -> int:
        """Unbiased draw from {0, ..., n-1} by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n
