"""
Seedable random streams

Every run draws from one RandomStream. The stream is numpy's PCG64
generator consumed in fixed-size blocks of doubles, so two streams with
the same seed hand out the same values for the same sequence of calls.
"""

from typing import List, Tuple, Union

import numpy as np

SEED_MASK = (1 << 64) - 1
DEFAULT_BLOCK = 4096


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed of substream `index` under `master_seed`"""
    sequence = np.random.SeedSequence(int(master_seed) & SEED_MASK, spawn_key=(int(index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class RandomStream:
    """Block-buffered uniform stream over PCG64"""

    def __init__(self, seed: int, block_size: int = DEFAULT_BLOCK):
        self.seed = int(seed) & SEED_MASK
        self.block_size = block_size
        self._generator = np.random.Generator(np.random.PCG64(self.seed))
        self._buffer: List[float] = []
        self._cursor = 0

    def random(self) -> float:
        """Uniform double in [0, 1)"""
        if self._cursor >= len(self._buffer):
            self._buffer = self._generator.random(self.block_size).tolist()
            self._cursor = 0
        value = self._buffer[self._cursor]
        self._cursor += 1
        return value

    def randbelow(self, k: int) -> int:
        """Uniform integer in [0, k) as floor(u * k)"""
        value = int(self.random() * k)
        return value if value < k else k - 1

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def uniform_array(self, size: Union[int, Tuple[int, ...]]) -> np.ndarray:
        """Vector of uniforms drawn straight from the generator"""
        return self._generator.random(size)

    def spawn(self, count: int) -> List["RandomStream"]:
        """Independent child streams, depending only on (seed, index)"""
        return [RandomStream(derive_seed(self.seed, i), self.block_size) for i in range(count)]

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed})"
