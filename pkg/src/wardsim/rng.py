"""Deterministic, content-keyed random numbers.

Every random decision in a run is a pure function of a 64-bit key chain
built from (master seed, purpose, day, entity ids, ...).  Because draws are
keyed by *what* is being decided rather than by their position in a stream,
results do not depend on iteration order, vectorisation, backend, or thread
count — which is exactly the reproducibility contract the engine promises.
A useful corollary: a duplicated contact event receives the same infection
trial as the original, so deduplication never changes epidemic outcomes.

The mixer is the splitmix64 finalizer chained over key words
(``h <- mix64(h ^ word)``).  Three implementations must stay bit-identical:
the scalar Python one here, the vectorised numpy one here, and the C one in
``kernels/_speedups.pyx``; ``tests/test_rng.py`` pins them to each other.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_ROOT = 0x243F6A8885A308D3  # first 64 fractional bits of pi

# 2^-53; a 53-bit mantissa keeps int->float exact and uniforms in [0, 1).
_UNIT = 2.0**-53

# Purpose words.  Globally unique so unrelated decisions never share a key.
VISIT_PLACE = 1
NBHD_CONTACTS = 2
WORK_CONTACTS = 3
DAY = 4
CONTACT_DRAW = 5
TRANSMIT = 6
COVID_PROGRESS = 7
FLU_PROGRESS = 8
REPORTING = 9
TEST_RESULT = 10
SELECTION = 11
SEED_INFECTION = 12
RUN_INDEX = 13
REPORTING_SPLIT = 14
CITY_WEIGHTS = 15
CITY_OD = 16
ROSTER = 17
FLU_INIT = 18


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit word (scalar reference)."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _MIX_A) & MASK64
    x ^= x >> 27
    x = (x * _MIX_B) & MASK64
    x ^= x >> 31
    return x


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorised mix64; accepts any integer array, returns uint64."""
    h = x.astype(np.uint64, copy=True)
    h ^= h >> np.uint64(30)
    h *= np.uint64(_MIX_A)
    h ^= h >> np.uint64(27)
    h *= np.uint64(_MIX_B)
    h ^= h >> np.uint64(31)
    return h


def unit_double(h: int) -> float:
    """Map a 64-bit hash to a double in [0, 1)."""
    return (h >> 11) * _UNIT


def uniforms(state: int, words: np.ndarray) -> np.ndarray:
    """One uniform per word: unit(mix64(state ^ word))."""
    h = mix64_array(np.asarray(words, dtype=np.uint64) ^ np.uint64(state))
    return (h >> np.uint64(11)).astype(np.float64) * _UNIT


def uniforms2(state: int, a: np.ndarray, b) -> np.ndarray:
    """One uniform per (a, b) pair: unit(mix64(mix64(state ^ a) ^ b))."""
    h = mix64_array(np.asarray(a, dtype=np.uint64) ^ np.uint64(state))
    h = mix64_array(h ^ np.asarray(b, dtype=np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * _UNIT


class Key:
    """An immutable point in the key chain.

    ``child(*words)`` absorbs words into the state; ``uniform(*words)`` is a
    one-shot draw; ``stream(*words)`` gives a sequential source for the few
    places (sampling without replacement) where draws are inherently ordered.
    """

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & MASK64

    @classmethod
    def from_seed(cls, seed: int) -> "Key":
        return cls(mix64(_ROOT ^ (seed & MASK64)))

    def child(self, *words: int) -> "Key":
        s = self.state
        for w in words:
            s = mix64(s ^ (w & MASK64))
        return Key(s)

    def uniform(self, *words: int) -> float:
        return unit_double(self.child(*words).state)

    def bernoulli(self, p: float, *words: int) -> bool:
        return self.uniform(*words) < p

    def stream(self, *words: int) -> "Stream":
        return Stream(self.child(*words).state)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Key(0x{self.state:016x})"


class Stream:
    """Counter-based sequential uniforms hanging off one key state."""

    __slots__ = ("state", "counter")

    def __init__(self, state: int):
        self.state = state & MASK64
        self.counter = 0

    def uniform(self) -> float:
        u = unit_double(mix64(self.state ^ self.counter))
        self.counter += 1
        return u

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        i = int(self.uniform() * n)
        return min(i, n - 1)


def sample_without_replacement(items: np.ndarray, k: int, stream: Stream) -> np.ndarray:
    """Uniform k-subset of ``items`` via partial Fisher-Yates.

    Returns at most len(items) entries, in selection order.
    """
    pool = np.array(items, copy=True)
    k = min(k, len(pool))
    for i in range(k):
        j = i + stream.randbelow(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def weighted_sample_without_replacement(
    items: np.ndarray, weights: np.ndarray, k: int, stream: Stream
) -> np.ndarray:
    """Successive weighted sampling without replacement.

    Each draw picks proportionally to the remaining weights, then removes the
    winner.  Weights must be positive.
    """
    items = np.asarray(items)
    w = np.asarray(weights, dtype=np.float64).copy()
    if len(items) != len(w):
        raise ValueError("items and weights must have equal length")
    if np.any(w <= 0.0):
        raise ValueError("weights must be positive")
    k = min(k, len(items))
    chosen = np.empty(k, dtype=items.dtype)
    alive = np.ones(len(items), dtype=bool)
    for i in range(k):
        cum = np.cumsum(w * alive)
        x = stream.uniform() * cum[-1]
        j = int(np.searchsorted(cum, x, side="right"))
        j = min(j, len(items) - 1)
        while j > 0 and not alive[j]:  # float-edge clamp can land on a removed slot
            j -= 1
        chosen[i] = items[j]
        alive[j] = False
    return chosen
