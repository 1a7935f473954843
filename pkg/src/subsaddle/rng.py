"""Deterministic, hierarchical random streams.

Every source of randomness in this package flows through a `Stream`: a
counter-based SplitMix64 sequence whose 64-bit key is derived by folding a
seed with a path of labels.  Substreams are derived from the key alone and
never consume state from their parent, so toggling one consumer (say, the
threshold-rounding draws) cannot perturb another (the oracle directions).

Gaussians come from the Box-Muller transform on 53-bit uniforms.  All
integer arithmetic is fixed-width and the float pipeline is a handful of
IEEE-754 operations, so identical seeds reproduce identical draws.
"""

from __future__ import annotations

import math

import numpy as np

_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective scramble."""
    z &= _M64
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    return z ^ (z >> 31)


def _label_to_u64(part) -> int:
    if isinstance(part, str):
        h = _FNV_OFFSET
        for b in part.encode("utf-8"):
            h = ((h ^ b) * _FNV_PRIME) & _M64
        return h
    if isinstance(part, (int, np.integer)):
        return int(part) & _M64
    raise TypeError(f"stream labels must be int or str, got {type(part).__name__}")


def _fold(key: int, part) -> int:
    return _mix(((key ^ _mix(_label_to_u64(part))) + _GAMMA) & _M64)


def mix_vec(z: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer over a uint64 array."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def fold_vec(keys: np.ndarray, label) -> np.ndarray:
    """Vectorized `substream` key derivation: one label across many keys."""
    mixed = np.uint64(_mix(_label_to_u64(label)))
    return mix_vec((keys ^ mixed) + np.uint64(_GAMMA))


def normals_from_keys(keys: np.ndarray) -> np.ndarray:
    """One standard normal per key, drawing the same uniforms as
    Stream(key).normals(1); the Box-Muller transform may differ from the
    scalar path in the last bit where vector and scalar libm disagree."""
    u1 = (mix_vec(keys + np.uint64(_GAMMA)) >> np.uint64(11)).astype(np.float64) * 2.0**-53
    u2 = (mix_vec(keys + np.uint64((2 * _GAMMA) & _M64)) >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


class Stream:
    """One independent draw sequence; cheap to fork by label path."""

    __slots__ = ("key", "_n")

    def __init__(self, key: int):
        self.key = key & _M64
        self._n = 0

    @classmethod
    def from_seed(cls, seed: int, *path) -> "Stream":
        key = _mix(int(seed) & _M64)
        for part in path:
            key = _fold(key, part)
        return cls(key)

    def substream(self, *path) -> "Stream":
        key = self.key
        for part in path:
            key = _fold(key, part)
        return Stream(key)

    def next_u64(self) -> int:
        self._n += 1
        return _mix((self.key + self._n * _GAMMA) & _M64)

    def uniform(self) -> float:
        """One double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, size: int) -> np.ndarray:
        """`size` doubles in [0, 1); matches repeated `uniform` calls exactly."""
        if size <= 8:
            # Scalar integer pipeline beats numpy dispatch at these sizes and
            # produces bit-identical values.
            return np.array([(self.next_u64() >> 11) * 2.0**-53 for _ in range(size)])
        idx = np.arange(self._n + 1, self._n + size + 1, dtype=np.uint64)
        self._n += size
        z = np.uint64(self.key) + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normals(self, size: int) -> np.ndarray:
        """Standard normals via Box-Muller; consumes ceil(size/2) uniform pairs.

        Tiny requests run through scalar libm, large ones through numpy; a
        given call site always has a fixed size, so every stream remains
        reproducible draw for draw.
        """
        pairs = (size + 1) // 2
        if size <= 4:
            out = np.empty(2 * pairs)
            for p in range(pairs):
                u1 = (self.next_u64() >> 11) * 2.0**-53
                u2 = (self.next_u64() >> 11) * 2.0**-53
                r = math.sqrt(-2.0 * math.log1p(-u1))
                out[2 * p] = r * math.cos(2.0 * math.pi * u2)
                out[2 * p + 1] = r * math.sin(2.0 * math.pi * u2)
            return out[:size]
        u = self.uniforms(2 * pairs)
        # 1 - u lies in (0, 1], keeping the log finite.
        r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        theta = (2.0 * np.pi) * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:size]

    def normal(self) -> float:
        u1 = (self.next_u64() >> 11) * 2.0**-53
        u2 = (self.next_u64() >> 11) * 2.0**-53
        return math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)

    def randrange(self, n: int) -> int:
        """Integer in [0, n); negligible modulo bias for n << 2**64."""
        if n <= 0:
            raise ValueError("randrange needs a positive bound")
        return self.next_u64() % n

    def sample_without_replacement(self, count: int, pool) -> list:
        """`count` distinct elements from `pool`, order deterministic."""
        items = list(pool)
        if count > len(items):
            raise ValueError(f"cannot sample {count} from pool of {len(items)}")
        for i in range(count):
            j = i + self.randrange(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items[:count]
