"""Counter-based random streams keyed by ``(seed, stream)``.

Every random draw in the package goes through :func:`make_rng`.  The Philox
bit generator is keyed directly with the pair, so trial ``i`` of an
experiment draws the same numbers whether trials run serially or in
parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not (0 <= int(v) <= _U64):
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {v}")

    def child(self, stream: int) -> "RngSeed":
        return RngSeed(self.seed, stream)

    def generator(self) -> np.random.Generator:
        return make_rng(self.seed, self.stream)


def make_rng(seed, stream: int = 0) -> np.random.Generator:
    """Return a fresh generator for ``(seed, stream)``.

    ``seed`` may also be an :class:`RngSeed` (``stream`` is then ignored) or an
    existing ``Generator``, which is returned unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        seed, stream = seed.seed, seed.stream
    key = np.array([int(seed) & _U64, int(stream) & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
