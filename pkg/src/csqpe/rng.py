"""Deterministic random streams derived from one master seed.

Every stochastic component draws from a named substream keyed by what is
being sampled (e.g. ``("acq1", t, 0)`` for the real part of the channel
at time ``t``).  Substreams are independent of evaluation order, so
acquisitions and benchmark trials can run in parallel and still produce
bit-identical results.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

_MASK32 = 0xFFFFFFFF


def _key_words(parts) -> tuple[int, ...]:
    """Map a mixed int/str key to a tuple of uint32 words."""
    words: list[int] = []
    for part in parts:
        if isinstance(part, (int, np.integer)):
            p = int(part)
            if p < 0:
                # fold sign into a disjoint range
                words.append(1)
                p = -p
            words.append(p & _MASK32)
            words.append((p >> 32) & _MASK32)
        elif isinstance(part, str):
            digest = hashlib.blake2s(part.encode("utf-8"), digest_size=8).digest()
            words.append(int.from_bytes(digest[:4], "little"))
            words.append(int.from_bytes(digest[4:], "little"))
        else:
            raise TypeError(f"stream key parts must be int or str, got {type(part)!r}")
    return tuple(words)


@dataclass(frozen=True)
class SeededStreams:
    """Counter-style splitter: one master seed, many independent generators."""

    seed: int
    _prefix: tuple[int, ...] = field(default=())

    def generator(self, *key) -> np.random.Generator:
        """Return a fresh generator for the given substream key."""
        spawn = self._prefix + _key_words(key)
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=spawn))

    def scoped(self, *key) -> "SeededStreams":
        """A child splitter whose substreams are all nested under `key`."""
        return SeededStreams(self.seed, self._prefix + _key_words(key))


def as_streams(rng) -> SeededStreams:
    """Coerce an int seed or SeededStreams into a SeededStreams."""
    if isinstance(rng, SeededStreams):
        return rng
    if isinstance(rng, (int, np.integer)):
        return SeededStreams(int(rng))
    raise TypeError(f"expected an integer seed or SeededStreams, got {type(rng)!r}")
