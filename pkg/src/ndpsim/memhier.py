"""Cache hierarchy and memory timing: set-associative LRU caches (L1-only
in NDP mode, L1+L2+L3 in CPU mode), the metadata-bypass path, and a queued
fixed-latency memory controller shared by all cores.

Bypass routes Metadata (PTE) requests around every cache level straight to
memory, leaving cache contents and cache statistics untouched. It is only
legal with a single cache level: with an inclusive multi-level hierarchy
the bypass would violate inclusion, so CPU-mode configs reject it.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum

from .errors import AddressOutOfPhysicalRange, ConfigError

logger = logging.getLogger(__name__)

LINE_BYTES = 64
LINE_SHIFT = 6


class Kind(str, Enum):
    DATA = "data"
    METADATA = "metadata"


@dataclass(frozen=True)
class CacheConfig:
    name: str
    size_bytes: int
    ways: int
    latency: int
    line_bytes: int = LINE_BYTES

    def __post_init__(self):
        lines = self.size_bytes // self.line_bytes
        if lines % self.ways:
            raise ConfigError(
                f"{self.name}: {lines} lines not divisible by {self.ways} ways")


@dataclass(frozen=True)
class MemoryRequest:
    core: int
    address: int
    kind: Kind
    write: bool
    issue_cycle: int


class Cache:
    """One set-associative write-back write-allocate LRU cache level.

    Each set is an OrderedDict tag -> dirty flag in LRU order (oldest
    first). access() probes, updates recency, and allocates on miss.
    """

    def __init__(self, config: CacheConfig):
        self.config = config
        self.ways = config.ways
        self.n_sets = config.size_bytes // config.line_bytes // config.ways
        self.sets: list[OrderedDict] = [OrderedDict() for _ in range(self.n_sets)]

    def access(self, address: int, write: bool) -> tuple[bool, bool]:
        """Probe one line; returns (hit, dirty_eviction)."""
        tag = address >> LINE_SHIFT
        lines = self.sets[tag % self.n_sets]
        if tag in lines:
            lines.move_to_end(tag)
            if write:
                lines[tag] = True
            return True, False
        dirty_evict = False
        if len(lines) >= self.ways:
            _, dirty_evict = lines.popitem(last=False)
        lines[tag] = write
        return False, dirty_evict

    def resident_tags(self, set_index: int) -> list[int]:
        """LRU-order tags of one set (oldest first); for verification."""
        return list(self.sets[set_index].keys())


class MemoryModel:
    """Single shared FIFO controller with fixed access latency.

    departure = max(arrival, previous departure + service_interval);
    latency = (departure - arrival) + access_latency. Contention therefore
    grows with the number of cores hammering the controller.
    """

    _IDLE = -1 << 62  # sentinel: first departure equals its arrival

    def __init__(self, access_latency: int, service_interval: int):
        self.access_latency = access_latency
        self.service_interval = service_interval
        self.last_departure: int = self._IDLE
        self.requests = {Kind.DATA: 0, Kind.METADATA: 0}
        self.writes = 0

    def access(self, arrival: int, kind: Kind, write: bool = False) -> int:
        departure = self.last_departure + self.service_interval
        if departure < arrival:
            departure = arrival
        self.last_departure = departure
        self.requests[kind] += 1
        if write:
            self.writes += 1
        return departure - arrival + self.access_latency


class MemoryHierarchy:
    """Per-core private cache stacks in front of one shared memory model."""

    def __init__(self, cores: int, cache_configs: list[CacheConfig],
                 memory: MemoryModel, bypass: bool, phys_bytes: int):
        if bypass and len(cache_configs) > 1:
            raise ConfigError(
                "metadata bypass requires a single cache level (NDP mode); "
                "it would violate inclusion in a multi-level hierarchy")
        self.cores = cores
        self.levels = [c.name for c in cache_configs]
        self.caches = [[Cache(c) for c in cache_configs] for _ in range(cores)]
        self.memory = memory
        self.bypass = bypass
        self.phys_bytes = phys_bytes
        self.hits = self._zero_stats()
        self.misses = self._zero_stats()
        self.bypassed_metadata = 0
        self.writebacks = 0
        self._single = len(cache_configs) == 1
        if self._single:
            first = self.levels[0]
            self._l1_hits = [self.hits[c][first] for c in range(cores)]
            self._l1_misses = [self.misses[c][first] for c in range(cores)]

    def _zero_stats(self) -> list[dict[str, dict[Kind, int]]]:
        return [{name: {Kind.DATA: 0, Kind.METADATA: 0} for name in self.levels}
                for _ in range(self.cores)]

    def access(self, core: int, address: int, kind: Kind, write: bool,
               now: int) -> int:
        """Time one request through core's caches (or around them)."""
        if not 0 <= address < self.phys_bytes:
            raise AddressOutOfPhysicalRange(
                f"physical address {address:#x} beyond {self.phys_bytes:#x}")
        if self.bypass and kind is Kind.METADATA:
            self.bypassed_metadata += 1
            return self.memory.access(now, kind, write)

        if self._single:  # NDP: open-coded L1 + memory (hot path)
            cache = self.caches[core][0]
            latency = cache.config.latency
            tag = address >> LINE_SHIFT
            lines = cache.sets[tag % cache.n_sets]
            if tag in lines:
                lines.move_to_end(tag)
                if write:
                    lines[tag] = True
                self._l1_hits[core][kind] += 1
                return latency
            if len(lines) >= cache.ways:
                _, dirty = lines.popitem(last=False)
                if dirty:
                    self.writebacks += 1
            lines[tag] = write
            self._l1_misses[core][kind] += 1
            mem = self.memory
            departure = mem.last_departure + mem.service_interval
            arrival = now + latency
            if departure < arrival:
                departure = arrival
            mem.last_departure = departure
            mem.requests[kind] += 1
            if write:
                mem.writes += 1
            return latency + departure - arrival + mem.access_latency

        latency = 0
        hits, misses = self.hits[core], self.misses[core]
        for name, cache in zip(self.levels, self.caches[core]):
            latency += cache.config.latency
            hit, dirty_evict = cache.access(address, write)
            if dirty_evict:
                # Write-backs are counted but not timed: they are off the
                # critical path and excluded from the request-conservation
                # identity on purpose.
                self.writebacks += 1
            if hit:
                hits[name][kind] += 1
                return latency
            misses[name][kind] += 1
        return latency + self.memory.access(now + latency, kind, write)

    def access_request(self, req: MemoryRequest) -> int:
        return self.access(req.core, req.address, req.kind, req.write,
                           req.issue_cycle)
