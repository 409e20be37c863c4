"""Counter-based random streams.

Every random draw is a pure function of ``(key, node, round, slot)`` where
``key`` is derived from the master seed and the trial index.  Draws therefore
do not depend on evaluation order, batching or worker count: the scalar engine
and the vectorised A_col executor produce bit-identical trajectories.

The mixing function is the SplitMix64 finalizer.  A scalar (Python int) and a
vectorised (numpy uint64) version are kept side by side; the test-suite checks
that they agree.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

#: Round index reserved for drawing initial (random) configurations.
INIT_ROUND = 0xFFFFFFFF


def mix64(x: int) -> int:
    z = (x + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, *parts: int) -> int:
    """Hash a seed together with an arbitrary number of integer coordinates."""
    h = mix64(seed & MASK64)
    for p in parts:
        h = mix64(h ^ (p & MASK64))
    return h


def mix64_array(x: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64; 0-d inputs would otherwise warn
    with np.errstate(over="ignore"):
        z = x.astype(np.uint64) + np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_array(seed, *parts) -> np.ndarray:
    """Vectorised :func:`derive`; arguments broadcast against each other."""
    h = mix64_array(np.asarray(seed, dtype=np.uint64))
    for p in parts:
        h = mix64_array(h ^ np.asarray(p).astype(np.uint64))
    return h


def trial_key(master_seed: int, trial: int) -> int:
    return derive(master_seed, 0x7472, trial)


def trial_keys(master_seed: int, trials) -> np.ndarray:
    trials = np.asarray(trials, dtype=np.int64)
    return derive_array(np.uint64(master_seed & MASK64), np.int64(0x7472), trials)


def coin(h):
    """Fair bit from the top bit of a 64-bit draw (scalar or array)."""
    if isinstance(h, np.ndarray):
        return (h >> np.uint64(63)).astype(bool)
    return h >> 63


def below(h, m):
    """Uniform integer in ``[0, m)`` by multiply-shift on the high 32 bits."""
    if isinstance(h, np.ndarray):
        hi = h >> np.uint64(32)
        return ((hi * np.asarray(m).astype(np.uint64)) >> np.uint64(32)).astype(np.int64)
    return ((h >> 32) * m) >> 32


class NodeRng:
    """The stream owned by one node in one round of one trial.

    Successive calls consume successive slots, so a transition that draws a
    coin and then a color uses slots 0 and 1.
    """

    __slots__ = ("key", "node", "round", "_slot")

    def __init__(self, key: int, node: int, round_: int):
        self.key = key
        self.node = node
        self.round = round_
        self._slot = 0

    def _next(self) -> int:
        h = derive(self.key, self.node, self.round, self._slot)
        self._slot += 1
        return h

    def bit(self) -> int:
        return coin(self._next())

    def below(self, m: int) -> int:
        if m <= 0:
            raise ValueError("below() needs a positive bound")
        return below(self._next(), m)


class Streams:
    """Per-trial stream factory handed to the engine."""

    __slots__ = ("key",)

    def __init__(self, key: int):
        self.key = key & MASK64

    @classmethod
    def for_trial(cls, master_seed: int, trial: int = 0) -> "Streams":
        return cls(trial_key(master_seed, trial))

    def node(self, node: int, round_: int) -> NodeRng:
        return NodeRng(self.key, node, round_)
