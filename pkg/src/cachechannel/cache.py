"""LRU block cache shared by every simulated compartment.

Files are split into fixed 512 KB blocks.  A read touches the file's blocks
in ascending index order and promotes each to most-recently-used; when the
cache is full the least-recently-used block is dropped.  Read cost is charged
per block: resident blocks at the RAM rate, everything else at the backing
rate.  Jitter is the caller's business, a ReadOutcome carries the nominal
duration only.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

from .errors import ConfigurationError
from .timing import BLOCK_BYTES, BLOCK_MB, PhysicalParams, read_duration_seconds

# Sanity bound for the modelled backing store (1 TiB worth of MB); reads of
# anything larger are treated as a configuration mistake.
BACKING_STORE_LIMIT_MB = 1 << 20


@dataclass(frozen=True)
class BlockId:
    """One cached block, identified by its file and block ordinal."""

    file_id: str
    index: int


@dataclass(frozen=True)
class SimFile:
    """A compartment-owned file, sized in whole blocks."""

    file_id: str
    size_bytes: int
    owner: str

    def __post_init__(self) -> None:
        if self.size_bytes <= 0:
            raise ConfigurationError(f"file {self.file_id!r} must not be empty")
        if self.size_bytes % BLOCK_BYTES != 0:
            raise ConfigurationError(
                f"file {self.file_id!r} size must be a multiple of the "
                f"{BLOCK_BYTES}-byte block size"
            )

    @classmethod
    def from_mb(cls, file_id: str, size_mb: float, owner: str) -> "SimFile":
        return cls(file_id=file_id, size_bytes=round(size_mb * 2) * BLOCK_BYTES, owner=owner)

    @property
    def n_blocks(self) -> int:
        return self.size_bytes // BLOCK_BYTES

    @property
    def size_mb(self) -> float:
        return self.n_blocks * BLOCK_MB

    def block(self, index: int) -> BlockId:
        return BlockId(self.file_id, index)

    def blocks(self) -> tuple[BlockId, ...]:
        return tuple(BlockId(self.file_id, i) for i in range(self.n_blocks))


@dataclass(frozen=True)
class ReadOutcome:
    """Hit/miss split of one file read and its nominal duration in seconds."""

    hit_blocks: int
    miss_blocks: int
    duration: float


class BlockCache:
    """Fixed-capacity LRU set of resident block ids."""

    def __init__(self, capacity_blocks: int, policy: str = "lru") -> None:
        if capacity_blocks < 1:
            raise ConfigurationError("cache must hold at least one block")
        if policy != "lru":
            raise ConfigurationError(f"unsupported eviction policy {policy!r}")
        self.capacity_blocks = capacity_blocks
        self.policy = policy
        # Ordered oldest -> newest; values are unused.
        self._resident: OrderedDict[BlockId, None] = OrderedDict()

    @classmethod
    def from_mb(cls, cache_size_mb: float, policy: str = "lru") -> "BlockCache":
        return cls(int(cache_size_mb * 1024 * 1024 // BLOCK_BYTES), policy)

    def __len__(self) -> int:
        return len(self._resident)

    def is_resident(self, block: BlockId) -> bool:
        """Membership test only; recency order is untouched."""
        return block in self._resident

    def resident_blocks(self) -> tuple[BlockId, ...]:
        """Snapshot of the resident set, oldest first."""
        return tuple(self._resident)

    def touch(self, block: BlockId) -> bool:
        """Access one block, returning True on a hit."""
        hit = block in self._resident
        if hit:
            self._resident.move_to_end(block)
        else:
            self._resident[block] = None
            if len(self._resident) > self.capacity_blocks:
                self._resident.popitem(last=False)
        return hit

    def read_file(self, file: SimFile, params: PhysicalParams) -> ReadOutcome:
        """Read a whole file through the cache, block by ascending index."""
        if file.size_mb > BACKING_STORE_LIMIT_MB:
            raise ConfigurationError(
                f"file {file.file_id!r} exceeds the modelled backing store"
            )
        hits = 0
        for block in file.blocks():
            if self.touch(block):
                hits += 1
        misses = file.n_blocks - hits
        duration = read_duration_seconds(misses * BLOCK_MB, hits * BLOCK_MB, params)
        return ReadOutcome(hit_blocks=hits, miss_blocks=misses, duration=duration)


def evict_all_via_read(cache: BlockCache, sender_file: SimFile, params: PhysicalParams) -> ReadOutcome:
    """Flush every foreign block by reading a file at least as large as the cache."""
    if sender_file.n_blocks < cache.capacity_blocks:
        raise ConfigurationError(
            "sender file smaller than the cache cannot guarantee full eviction"
        )
    return cache.read_file(sender_file, params)
