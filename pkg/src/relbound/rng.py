"""Deterministic derivation of independent random streams.

Stochastic routines accept a seed-like value: an ``int``, a
``numpy.random.SeedSequence``, or a live ``numpy.random.Generator``.
Child streams are derived from explicit integer keys rather than from
spawn order, so a computation split across any number of workers draws
exactly the same numbers as a serial run with the same master seed.
Passing a live ``Generator`` opts out of the keyed-derivation contract:
it is consumed sequentially.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, None, np.random.SeedSequence, np.random.Generator]


def as_seedseq(seed: SeedLike) -> np.random.SeedSequence:
    """Coerce an int/None/SeedSequence to a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        raise TypeError("cannot derive keyed child streams from a live Generator")
    return np.random.SeedSequence(seed)


def child_seedseq(base: SeedLike, *key: int) -> np.random.SeedSequence:
    """SeedSequence for the child stream identified by ``key`` under ``base``."""
    base = as_seedseq(base)
    return np.random.SeedSequence(entropy=base.entropy,
                                  spawn_key=tuple(base.spawn_key) + key)


def generator(seed: SeedLike, *key: int) -> np.random.Generator:
    """Generator for the (optionally keyed) stream under ``seed``.

    A live Generator is returned unchanged, whatever the key; callers that
    need reproducibility across worker counts must pass seed material instead.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(child_seedseq(seed, *key) if key else as_seedseq(seed))


def seed_entropy(seed: SeedLike) -> int | None:
    """Integer entropy recorded in result diagnostics, when recoverable."""
    if isinstance(seed, np.random.Generator):
        return None
    if isinstance(seed, np.random.SeedSequence):
        ent = seed.entropy
        return int(ent) if isinstance(ent, int) else None
    return None if seed is None else int(seed)
