"""Per-core translation machinery: L1/L2 TLBs, per-level page-walk caches,
and the page walker that issues timed metadata memory requests.

Walker timing: every level of the walk path costs one PWC-latency lookup
step; levels not covered by the deepest PWC hit additionally fetch their
PTE through the memory hierarchy (sequentially, one request at a time).
All PWC levels are probed on every walk and counted individually; the
deepest level whose prefix is present decides where the walk resumes, so
a hit at level L skips the memory accesses at L and everything above it.
Leaf levels (PL1 / PL21 / the huge-page PL2) have no PWC and always fetch.

This module sits on the simulator's innermost loop, so TLB and PWC probes
are open-coded against the OrderedDict sets instead of going through
LruArray method calls.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

from . import addr
from .memhier import Kind, MemoryHierarchy
from .pagetable import PL2, PL3, PL4, PageTableMode, PageTableSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TlbConfig:
    entries: int
    ways: int
    latency: int


@dataclass(frozen=True)
class PwcConfig:
    entries: int = 16
    ways: int = 4
    latency: int = 1


class LruArray:
    """Generic set-associative LRU key/value store (TLBs and PWCs).

    Integer keys only; the set index is key mod set count. Each set is an
    OrderedDict in LRU order, oldest first.
    """

    __slots__ = ("ways", "n_sets", "sets")

    def __init__(self, entries: int, ways: int):
        self.ways = min(ways, entries)
        self.n_sets = max(1, entries // ways)
        self.sets: list[OrderedDict] = [OrderedDict() for _ in range(self.n_sets)]

    def lookup(self, key: int) -> tuple[bool, object]:
        entries = self.sets[key % self.n_sets]
        if key in entries:
            entries.move_to_end(key)
            return True, entries[key]
        return False, None

    def insert(self, key: int, value) -> tuple | None:
        """Insert key as most-recent; returns the evicted pair, if any."""
        entries = self.sets[key % self.n_sets]
        victim = None
        if key not in entries and len(entries) >= self.ways:
            victim = entries.popitem(last=False)
        entries[key] = value
        entries.move_to_end(key)
        return victim

    def resident_keys(self, set_index: int) -> list:
        return list(self.sets[set_index].keys())


@dataclass
class WalkOutcome:
    frame: int
    cycles: int
    requests: int
    pwc_hits: dict[str, bool]


class TranslationUnit:
    """One core's MMU: L1 DTLB, L2 TLB, PWCs, page walker.

    The ITLB exists in configuration for fidelity but traces only exercise
    the data side, so it is never probed here.
    """

    # PWC levels per structural mode (leaf level never has one).
    _PWC_LEVELS = {
        PageTableMode.RADIX4: (PL4, PL3, PL2),
        PageTableMode.FLATTENED_L21: (PL4, PL3),
        PageTableMode.HUGE_2M: (PL4, PL3),
        PageTableMode.IDEAL: (),
    }

    def __init__(self, core: int, dtlb: TlbConfig, l2tlb: TlbConfig,
                 pwc: PwcConfig, pagetable: PageTableSet,
                 memhier: MemoryHierarchy):
        self.core = core
        self.pagetable = pagetable
        self.memhier = memhier
        self.dtlb_cfg = dtlb
        self.l2tlb_cfg = l2tlb
        self.pwc_cfg = pwc
        self.l1_tlb = LruArray(dtlb.entries, dtlb.ways)
        self.l2_tlb = LruArray(l2tlb.entries, l2tlb.ways)
        self.pwc_levels = self._PWC_LEVELS[pagetable.mode]
        self.pwcs = {lvl: LruArray(pwc.entries, pwc.ways)
                     for lvl in self.pwc_levels}
        self._pwc_list = [self.pwcs[lvl] for lvl in self.pwc_levels]
        self._ideal = pagetable.mode is PageTableMode.IDEAL
        self._shift = pagetable.page_shift
        self._off_mask = (1 << self._shift) - 1
        # counters (PWC counters indexed by walk position)
        self.tlb_l1_hits = 0
        self.tlb_l1_misses = 0
        self.tlb_l2_hits = 0
        self.tlb_l2_misses = 0
        self._pwc_probes = [0] * len(self.pwc_levels)
        self._pwc_hits = [0] * len(self.pwc_levels)
        self.ptw_count = 0
        self.ptw_latency_sum = 0
        self.ptw_latency_max = 0
        self.leaf_fetches = 0
        self.metadata_requests = 0

    @property
    def pwc_probes(self) -> dict[str, int]:
        return dict(zip(self.pwc_levels, self._pwc_probes))

    @property
    def pwc_hits(self) -> dict[str, int]:
        return dict(zip(self.pwc_levels, self._pwc_hits))

    # -- TLB -------------------------------------------------------------

    def tlb_lookup(self, va: int) -> tuple[bool, int, int]:
        """Probe L1 then L2 TLB; returns (hit, frame, cycles spent)."""
        vpn = va >> self._shift
        cycles = self.dtlb_cfg.latency
        hit, frame = self.l1_tlb.lookup(vpn)
        if hit:
            self.tlb_l1_hits += 1
            return True, frame, cycles
        self.tlb_l1_misses += 1
        cycles += self.l2tlb_cfg.latency
        hit, frame = self.l2_tlb.lookup(vpn)
        if hit:
            self.tlb_l2_hits += 1
            self.tlb_insert(vpn, frame)  # promote on L2 hit
            return True, frame, cycles
        self.tlb_l2_misses += 1
        return False, 0, cycles

    def tlb_insert(self, vpn: int, frame: int):
        """Fill L1; demote the LRU victim (if any) into the L2 TLB."""
        victim = self.l1_tlb.insert(vpn, frame)
        if victim is not None:
            self.l2_tlb.insert(*victim)

    # -- page walk ---------------------------------------------------------

    def walk(self, va: int, now: int) -> WalkOutcome:
        """Page table walk with PWC short-circuiting; strictly sequential."""
        frame, cycles, requests, flags = self._walk(va, now, collect=True)
        return WalkOutcome(frame, cycles, requests,
                           dict(zip(self.pwc_levels, flags)))

    def _walk(self, va: int, now: int, collect: bool):
        ptes, frame = self.pagetable.resolve_ptes(va)
        n = len(ptes)
        i4 = (va >> 39) & 511
        k3 = (i4 << 9) | ((va >> 30) & 511)
        keys = (i4, k3, (k3 << 9) | ((va >> 21) & 511))

        pwcs = self._pwc_list
        probes = self._pwc_probes
        hits = self._pwc_hits
        flags = [False] * len(pwcs) if collect else None
        deepest = -1
        for pos in range(len(pwcs)):
            lru = pwcs[pos]
            key = keys[pos]
            lines = lru.sets[key % lru.n_sets]
            probes[pos] += 1
            if key in lines:
                lines.move_to_end(key)
                hits[pos] += 1
                deepest = pos
                if collect:
                    flags[pos] = True

        cycles = self.pwc_cfg.latency * n
        access = self.memhier.access
        meta = Kind.METADATA
        core = self.core
        requests = 0
        leaf = n - 1
        for pos in range(deepest + 1, n):
            cycles += access(core, ptes[pos], meta, False, now + cycles)
            requests += 1
            if pos == leaf:
                self.leaf_fetches += 1
            else:
                lru = pwcs[pos]
                key = keys[pos]
                lines = lru.sets[key % lru.n_sets]
                if key not in lines and len(lines) >= lru.ways:
                    lines.popitem(last=False)
                lines[key] = ptes[pos + 1]
                lines.move_to_end(key)

        self.metadata_requests += requests
        self.ptw_count += 1
        self.ptw_latency_sum += cycles
        if cycles > self.ptw_latency_max:
            self.ptw_latency_max = cycles
        return frame, cycles, requests, flags

    # -- front door -------------------------------------------------------

    def translate(self, va: int, now: int) -> tuple[int, int]:
        """TLB lookup, walk on miss, TLB fill; returns (pa, cycles)."""
        if self._ideal:
            self.tlb_l1_hits += 1  # by definition: always hits, zero latency
            return (self.pagetable.ideal_frame(va) << addr.PAGE_SHIFT) | (
                va & addr.OFFSET_MASK), 0

        shift = self._shift
        vpn = va >> shift
        l1 = self.l1_tlb
        lines = l1.sets[vpn % l1.n_sets]
        frame = lines.get(vpn)
        if frame is not None:
            lines.move_to_end(vpn)
            self.tlb_l1_hits += 1
            return (frame << shift) | (va & self._off_mask), self.dtlb_cfg.latency

        self.tlb_l1_misses += 1
        cycles = self.dtlb_cfg.latency + self.l2tlb_cfg.latency
        l2 = self.l2_tlb
        lines2 = l2.sets[vpn % l2.n_sets]
        frame = lines2.get(vpn)
        if frame is not None:
            lines2.move_to_end(vpn)
            self.tlb_l2_hits += 1
        else:
            self.tlb_l2_misses += 1
            frame, walk_cycles, _, _ = self._walk(va, now + cycles, False)
            cycles += walk_cycles
        # L1 fill (vpn is known absent: we just missed) + LRU victim demotion
        if len(lines) >= l1.ways:
            self.l2_tlb.insert(*lines.popitem(last=False))
        lines[vpn] = frame
        return (frame << shift) | (va & self._off_mask), cycles
